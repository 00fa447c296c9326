#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ecic/sample.hpp"

namespace ecic {

/// Pareto-tail summary of one cell: the top k order statistics above the
/// threshold Y^(k+1) and the Hill estimate of the tail exponent.
struct TailFit {
    int k = 0;
    double threshold = 0.0;  // Y^(k+1)
    double alpha_hat = 0.0;
    int n = 0;
};

/// Hill estimator: inverse mean log-spacing of the top k order statistics
/// over the threshold Y^(k+1).
inline TailFit hill_estimate(const SortedSample& sorted, int k) {
    const int n = sorted.n();
    if (k < 1 || k > n - 1)
        throw std::invalid_argument("hill_estimate: k out of range [1, n-1]");
    const double threshold = sorted.order_stat(k + 1);
    if (threshold <= 0.0)
        throw std::domain_error("non-positive threshold: apply a transform or reduce k");
    if (sorted.order_stat(1) == threshold)
        throw std::domain_error("degenerate ties at threshold");

    const double log_threshold = std::log(threshold);
    double sum = 0.0;
    for (int j = 1; j <= k; ++j) sum += std::log(sorted.order_stat(j)) - log_threshold;
    return TailFit{k, threshold, static_cast<double>(k) / sum, n};
}

/// Tail quantile extrapolated from the fit: Y^(k+1) * (k / (n(1-q)))^(1/alpha).
inline double extreme_quantile(const TailFit& fit, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("extreme_quantile: q must lie in (0,1)");
    const double depth = fit.k / (fit.n * (1.0 - q));
    return fit.threshold * std::pow(depth, 1.0 / fit.alpha_hat);
}

/// Estimated exceedance probability (k/n) * (y / Y^(k+1))^(-alpha).
/// Deliberately unclamped: values above 1 signal y below the fit's range and
/// must stay raw for the counterfactual composition to stay algebraic.
inline double tail_probability(const TailFit& fit, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("tail_probability: y must be positive");
    return (static_cast<double>(fit.k) / fit.n) * std::pow(y / fit.threshold, -fit.alpha_hat);
}

/// Extrapolation depth d = k / (n(1-q)); the CI's log factor.
inline double tail_depth(const TailFit& fit, double q) {
    return fit.k / (fit.n * (1.0 - q));
}

/// Deterministic threshold-count rule k = clamp(round(scale * n^power), 1, n-1).
inline int select_k_fixed(int n, double power = 0.5, double scale = 2.0) {
    if (n < 10) throw std::invalid_argument("select_k_fixed: n must be >= 10");
    if (!(power > 0.0 && power < 1.0))
        throw std::invalid_argument("select_k_fixed: power must lie in (0,1)");
    if (!(scale > 0.0)) throw std::invalid_argument("select_k_fixed: scale must be positive");
    long long k = std::llround(scale * std::pow(static_cast<double>(n), power));
    if (k < 1) k = 1;
    if (k > n - 1) k = n - 1;
    return static_cast<int>(k);
}

/// Threshold count plus a flag marking a fall-back to the fixed rule.
struct KChoice {
    int k = 0;
    bool fallback = false;
};

/// Sequential diagnostic on scaled log-spacings Z_j = j(log Y^(j) - log Y^(j+1)).
/// T(k) contrasts early against late spacings and is asymptotically standard
/// normal while the top k behave like an exact Pareto tail; the selected k is
/// one below the first smoothed |T| exceedance of c_crit, clamped to the
/// candidate range [max(10, 2% of n), 20% of n].
inline KChoice select_k_guillou_hall(const SortedSample& sorted, double c_crit = 1.25,
                                     int window = 5) {
    const int n = sorted.n();
    if (n < 20) throw std::invalid_argument("select_k_guillou_hall: n must be >= 20");
    if (!(c_crit > 0.0))
        throw std::invalid_argument("select_k_guillou_hall: c_crit must be positive");
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("select_k_guillou_hall: window must be odd and >= 1");

    const int k_min = std::max(10, static_cast<int>(std::llround(0.02 * n)));
    const int k_max = static_cast<int>(std::llround(0.2 * n));
    const int half = window / 2;

    // Z_j requires positive Y^(j) and Y^(j+1); stop at the first sign change.
    int j_cap = std::min(n - 1, k_max + half);
    int j_limit = 0;
    while (j_limit < j_cap && sorted.order_stat(j_limit + 2) > 0.0 &&
           sorted.order_stat(j_limit + 1) > 0.0)
        ++j_limit;

    const int cand_hi = std::min(k_max, j_limit);
    const int n_candidates = cand_hi - k_min + 1;
    if (n_candidates < k_min + window)
        return KChoice{select_k_fixed(n), true};

    // Prefix sums give T(k) = sqrt(3/k^3) * ((k+1) S1 - 2 W) / (S1 / k)
    // with S1 = sum Z_j and W = sum j Z_j over j <= k.
    const int t_lo = std::max(2, k_min - half);
    const int t_hi = std::min(j_limit, k_max + half);
    std::vector<double> abs_t(static_cast<std::size_t>(t_hi) + 1, 0.0);
    double s1 = 0.0, w = 0.0;
    for (int j = 1; j <= t_hi; ++j) {
        const double z =
            j * (std::log(sorted.order_stat(j)) - std::log(sorted.order_stat(j + 1)));
        s1 += z;
        w += j * z;
        if (j >= t_lo) {
            const double k = j;
            if (s1 <= 0.0) {
                abs_t[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
                continue;
            }
            const double contrast = (k + 1.0) * s1 - 2.0 * w;
            const double t_stat = std::sqrt(3.0 / (k * k * k)) * contrast / (s1 / k);
            abs_t[static_cast<std::size_t>(j)] = std::fabs(t_stat);
        }
    }

    for (int k = k_min; k <= cand_hi; ++k) {
        const int lo = std::max(t_lo, k - half);
        const int hi = std::min(t_hi, k + half);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += abs_t[static_cast<std::size_t>(j)];
        if (acc / (hi - lo + 1) > c_crit) return KChoice{std::max(k - 1, k_min), false};
    }
    return KChoice{cand_hi, false};
}

/// Threshold-count rule configuration shared by the fitting front ends.
struct KRule {
    enum class Kind { guillou_hall, fixed };
    Kind kind = Kind::guillou_hall;
    double power = 0.5;   // fixed rule
    double scale = 2.0;   // fixed rule
    double c_crit = 1.25; // diagnostic critical value
    int window = 5;       // diagnostic smoothing width
};

inline KChoice select_k(const SortedSample& sorted, const KRule& rule) {
    if (rule.kind == KRule::Kind::fixed)
        return KChoice{select_k_fixed(sorted.n(), rule.power, rule.scale), false};
    return select_k_guillou_hall(sorted, rule.c_crit, rule.window);
}

}  // namespace ecic
