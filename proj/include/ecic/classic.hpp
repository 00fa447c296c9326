#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecic/rng.hpp"
#include "ecic/sample.hpp"

namespace ecic {

/// Step-function empirical CDF with the left-inverse quantile convention
/// F^{-1}(q) = inf{y : F(y) >= q}, i.e. the ceil(q*n)-th smallest outcome.
struct EmpiricalCdf {
    std::vector<double> sorted_ascending;
    int n() const { return static_cast<int>(sorted_ascending.size()); }
};

inline EmpiricalCdf make_ecdf(const CellSample& sample) {
    validate_cell(sample);
    EmpiricalCdf cdf;
    cdf.sorted_ascending = sample.outcomes;
    std::sort(cdf.sorted_ascending.begin(), cdf.sorted_ascending.end());
    return cdf;
}

/// Fraction of outcomes <= y.
inline double ecdf_eval(const EmpiricalCdf& cdf, double y) {
    if (cdf.sorted_ascending.empty()) throw std::invalid_argument("empty cell");
    const auto it =
        std::upper_bound(cdf.sorted_ascending.begin(), cdf.sorted_ascending.end(), y);
    return static_cast<double>(it - cdf.sorted_ascending.begin()) / cdf.n();
}

/// Left-inverse quantile. The small slack keeps ceil(q*n) stable when q*n is
/// an integer up to rounding of the product.
inline double ecdf_quantile(const EmpiricalCdf& cdf, double q) {
    if (cdf.sorted_ascending.empty()) throw std::invalid_argument("empty cell");
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("ecdf_quantile: q must lie in (0,1]");
    const int n = cdf.n();
    long long idx = static_cast<long long>(std::ceil(q * n - 1e-9));
    if (idx < 1) idx = 1;
    if (idx > n) idx = n;
    return cdf.sorted_ascending[static_cast<std::size_t>(idx) - 1];
}

/// The four empirical CDFs of a QuadData, sorted once and reused.
struct CdfQuad {
    EmpiricalCdf f00, f01, f10, f11;
};

inline CdfQuad make_cdf_quad(const QuadData& data) {
    return CdfQuad{make_ecdf(data.cell_00), make_ecdf(data.cell_01),
                   make_ecdf(data.cell_10), make_ecdf(data.cell_11)};
}

struct CicComposition {
    double tau_hat = 0.0;
    double q_prime = 0.0;       // F00(F10^{-1}(q)), after clamping
    bool q_prime_clamped = false;
};

/// Plug-in quantile treatment effect F11^{-1}(q) - F01^{-1}(F00(F10^{-1}(q))).
/// A composed level of exactly 0 is lifted to the smallest attainable 1/n01.
inline CicComposition cic_composition(const CdfQuad& cdfs, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("cic_point_estimate: q must lie in (0,1)");
    const double y_star = ecdf_quantile(cdfs.f10, q);
    double q_prime = ecdf_eval(cdfs.f00, y_star);
    bool clamped = false;
    if (q_prime == 0.0) {
        q_prime = 1.0 / cdfs.f01.n();
        clamped = true;
    }
    const double counterfactual = ecdf_quantile(cdfs.f01, q_prime);
    return CicComposition{ecdf_quantile(cdfs.f11, q) - counterfactual, q_prime, clamped};
}

inline double cic_point_estimate(const CdfQuad& cdfs, double q) {
    return cic_composition(cdfs, q).tau_hat;
}

inline double cic_point_estimate(const QuadData& data, double q) {
    return cic_point_estimate(make_cdf_quad(data), q);
}

/// Epanechnikov kernel density estimate (1/nh) sum 0.75 (1-u^2) on |u|<=1.
inline double epanechnikov_density(const CellSample& sample, double y, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("epanechnikov_density: bandwidth must be positive");
    validate_cell(sample);
    double acc = 0.0;
    for (double value : sample.outcomes) {
        const double u = (y - value) / bandwidth;
        if (u > -1.0 && u < 1.0) acc += 0.75 * (1.0 - u * u);
    }
    return acc / (sample.outcomes.size() * bandwidth);
}

inline double sample_sd(const std::vector<double>& values) {
    const std::size_t n = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

/// Silverman's rule h = 0.9 min(sd, IQR/1.34) n^{-1/5}, IQR from left-inverse
/// quantiles. A zero IQR falls back to the sd, matching the usual guard.
inline double silverman_bandwidth(const CellSample& sample) {
    validate_cell(sample);
    const std::size_t n = sample.outcomes.size();
    if (n < 2) throw std::invalid_argument("silverman_bandwidth: need at least 2 outcomes");
    const double sd = sample_sd(sample.outcomes);
    if (!(sd > 0.0)) throw std::domain_error("degenerate sample for bandwidth");

    const EmpiricalCdf cdf = make_ecdf(sample);
    const double iqr = ecdf_quantile(cdf, 0.75) - ecdf_quantile(cdf, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

/// Delta-method standard error of the plug-in composition: one variance term
/// per estimated CDF or quantile, independent across cells, with kernel
/// density plug-ins at the evaluation points.
inline double cic_analytic_se(const QuadData& data, double q, const CdfQuad& cdfs) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("cic_analytic_se: q must lie in (0,1)");
    for (const auto* cell : {&data.cell_00, &data.cell_01, &data.cell_10, &data.cell_11})
        if (cell->outcomes.size() < 30)
            throw std::invalid_argument("cic_analytic_se: every cell needs n >= 30");

    const double y_star = ecdf_quantile(cdfs.f10, q);
    double q_prime = ecdf_eval(cdfs.f00, y_star);
    if (q_prime == 0.0) q_prime = 1.0 / cdfs.f01.n();
    const double a_point = ecdf_quantile(cdfs.f01, q_prime);
    const double q11_point = ecdf_quantile(cdfs.f11, q);

    const double f11 = epanechnikov_density(data.cell_11, q11_point,
                                            silverman_bandwidth(data.cell_11));
    const double f01 = epanechnikov_density(data.cell_01, a_point,
                                            silverman_bandwidth(data.cell_01));
    const double f10 = epanechnikov_density(data.cell_10, y_star,
                                            silverman_bandwidth(data.cell_10));
    const double f00 = epanechnikov_density(data.cell_00, y_star,
                                            silverman_bandwidth(data.cell_00));
    if (f11 < 1e-12 || f01 < 1e-12 || f10 < 1e-12)
        throw std::domain_error("vanishing density at evaluation point");

    const double n00 = static_cast<double>(cdfs.f00.n());
    const double n01 = static_cast<double>(cdfs.f01.n());
    const double n10 = static_cast<double>(cdfs.f10.n());
    const double n11 = static_cast<double>(cdfs.f11.n());

    const double var = q * (1.0 - q) / (n11 * f11 * f11) +
                       q_prime * (1.0 - q_prime) / (n01 * f01 * f01) +
                       q_prime * (1.0 - q_prime) / (n00 * f01 * f01) +
                       (f00 / f01) * (f00 / f01) * q * (1.0 - q) / (n10 * f10 * f10);
    return std::sqrt(var);
}

inline double cic_analytic_se(const QuadData& data, double q) {
    return cic_analytic_se(data, q, make_cdf_quad(data));
}

/// Within-cell resampling standard deviation of the point estimate.
/// Replicate r draws from the child stream of (seed, r), so the result is a
/// pure function of (data, q, reps, seed).
inline double cic_bootstrap_se(const QuadData& data, double q, int reps, std::uint64_t seed) {
    if (reps < 100) throw std::invalid_argument("cic_bootstrap_se: reps must be >= 100");
    const CdfQuad base = make_cdf_quad(data);

    std::vector<double> taus(static_cast<std::size_t>(reps));
    std::vector<double> scratch;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::child(seed, static_cast<std::uint64_t>(r));
        CdfQuad resampled;
        const EmpiricalCdf* sources[4] = {&base.f00, &base.f01, &base.f10, &base.f11};
        EmpiricalCdf* targets[4] = {&resampled.f00, &resampled.f01, &resampled.f10,
                                    &resampled.f11};
        for (int c = 0; c < 4; ++c) {
            const auto& pool = sources[c]->sorted_ascending;
            scratch.resize(pool.size());
            for (auto& slot : scratch) slot = pool[rng.index(pool.size())];
            std::sort(scratch.begin(), scratch.end());
            targets[c]->sorted_ascending = scratch;
        }
        taus[static_cast<std::size_t>(r)] = cic_point_estimate(resampled, q);
    }
    return sample_sd(taus);
}

/// Conventional estimate with its chosen standard error.
struct ClassicEstimate {
    double q = 0.0;
    double tau_hat = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool bootstrap = false;
};

inline ClassicEstimate classic_estimate(const QuadData& data, double q, bool bootstrap_se,
                                        int reps = 200, std::uint64_t seed = 0) {
    const CdfQuad cdfs = make_cdf_quad(data);
    const double tau = cic_point_estimate(cdfs, q);
    const double se = bootstrap_se ? cic_bootstrap_se(data, q, reps, seed)
                                   : cic_analytic_se(data, q, cdfs);
    return ClassicEstimate{q, tau, se, tau - 1.96 * se, tau + 1.96 * se, bootstrap_se};
}

}  // namespace ecic
