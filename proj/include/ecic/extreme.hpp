#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "ecic/classic.hpp"
#include "ecic/rng.hpp"
#include "ecic/sample.hpp"
#include "ecic/tail.hpp"

namespace ecic {

/// Per-cell tail fits of a two-by-two design, with flags marking cells whose
/// threshold count fell back to the fixed rule.
struct EcicFit {
    TailFit fit_00, fit_01, fit_10, fit_11;
    bool fallback_00 = false, fallback_01 = false, fallback_10 = false, fallback_11 = false;

    const TailFit& fit(int g, int t) const {
        if (g == 0) return t == 0 ? fit_00 : fit_01;
        return t == 0 ? fit_10 : fit_11;
    }
};

enum class Method { ecic, cic };
enum class Tail { right, left };

inline const char* method_name(Method m) { return m == Method::ecic ? "ecic" : "cic"; }
inline const char* tail_name(Tail t) { return t == Tail::right ? "right" : "left"; }

/// Point estimate with inference and per-run diagnostics.
struct EffectEstimate {
    double q = 0.0;
    double tau_hat = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    Method method = Method::ecic;
    Tail tail = Tail::right;
    TailTransform transform = TailTransform::identity;
    std::map<std::string, double> diagnostics;
};

/// Tail estimate of the counterfactual treated quantile,
/// F01^{-1}(F00(F10^{-1}(q))) with every piece replaced by its Pareto-tail
/// estimator. Factored so that identical fits collapse to the own-cell
/// quantile without rounding residue.
inline double counterfactual_tail_quantile(const TailFit& fit_00, const TailFit& fit_01,
                                           const TailFit& fit_10, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("counterfactual_tail_quantile: q must lie in (0,1)");
    const double slope_ratio = fit_00.alpha_hat / fit_01.alpha_hat;
    const double depth_exponent = (fit_00.alpha_hat / fit_10.alpha_hat) / fit_01.alpha_hat;
    const double count_ratio =
        (static_cast<double>(fit_01.k) * static_cast<double>(fit_00.n)) /
        (static_cast<double>(fit_01.n) * static_cast<double>(fit_00.k));
    const double depth_10 = fit_10.k / (fit_10.n * (1.0 - q));
    return fit_01.threshold * std::pow(fit_10.threshold / fit_00.threshold, slope_ratio) *
           std::pow(count_ratio, 1.0 / fit_01.alpha_hat) * std::pow(depth_10, depth_exponent);
}

/// Extreme quantile treatment effect: treated-cell tail quantile minus the
/// counterfactual tail quantile.
inline double ecic_point_estimate(const EcicFit& efit, double q) {
    return extreme_quantile(efit.fit_11, q) -
           counterfactual_tail_quantile(efit.fit_00, efit.fit_01, efit.fit_10, q);
}

namespace detail {

// (lambda_11/10 / eta_11/10)^2 [lambda_11/00 + lambda_11/10 + lambda_11/01]
// * alpha_00^2 / (alpha_10^2 alpha_01^2): the counterfactual block shared by
// the asymptotic variance and the CI bracket.
inline double counterfactual_variance_factor(const EcicFit& efit) {
    const double k11 = efit.fit_11.k;
    const double lambda_00 = k11 / efit.fit_00.k;
    const double lambda_10 = k11 / efit.fit_10.k;
    const double lambda_01 = k11 / efit.fit_01.k;
    const double eta_10 = static_cast<double>(efit.fit_11.n) / efit.fit_10.n;
    const double a00 = efit.fit_00.alpha_hat;
    const double a10 = efit.fit_10.alpha_hat;
    const double a01 = efit.fit_01.alpha_hat;
    const double ratio = lambda_10 / eta_10;
    return ratio * ratio * (lambda_00 + lambda_10 + lambda_01) * (a00 * a00) /
           ((a10 * a10) * (a01 * a01));
}

}  // namespace detail

/// Asymptotic variance of the normalized estimator with plug-ins for the
/// tail exponents, the threshold-count ratios, and the quantile ratio.
inline double omega_variance(const EcicFit& efit, double varsigma_hat) {
    for (const TailFit* fit : {&efit.fit_00, &efit.fit_01, &efit.fit_10, &efit.fit_11})
        if (!(fit->alpha_hat > 0.0) || !std::isfinite(fit->alpha_hat))
            throw std::invalid_argument("omega_variance: tail exponents must be positive finite");
    if (!(varsigma_hat > 0.0) || !std::isfinite(varsigma_hat))
        throw std::invalid_argument("omega_variance: varsigma_hat must be positive finite");

    const double a11 = efit.fit_11.alpha_hat;
    const double omega = 1.0 / (a11 * a11) +
                         detail::counterfactual_variance_factor(efit) /
                             (varsigma_hat * varsigma_hat);
    if (!std::isfinite(omega)) throw std::domain_error("omega_variance: non-finite result");
    return omega;
}

namespace detail {

inline void put_fit_diagnostics(std::map<std::string, double>& diag, const EcicFit& efit,
                                double q) {
    const struct {
        const char* suffix;
        const TailFit* fit;
        bool fallback;
    } cells[] = {{"00", &efit.fit_00, efit.fallback_00},
                 {"01", &efit.fit_01, efit.fallback_01},
                 {"10", &efit.fit_10, efit.fallback_10},
                 {"11", &efit.fit_11, efit.fallback_11}};
    for (const auto& c : cells) {
        diag["k_" + std::string(c.suffix)] = c.fit->k;
        diag["alpha_" + std::string(c.suffix)] = c.fit->alpha_hat;
        diag["d_" + std::string(c.suffix)] = tail_depth(*c.fit, q);
        diag["k_fallback_" + std::string(c.suffix)] = c.fallback ? 1.0 : 0.0;
    }
}

}  // namespace detail

/// Point estimate and 95% CI from per-cell tail fits. The CI half-width is
/// 1.96 k11^{-1/2} log(d11 v d_floor) times the square root of the
/// two-component variance bracket; d11 below the floor is flagged.
inline EffectEstimate ecic_confidence_interval(const EcicFit& efit, double q,
                                               double d_floor = 10.0) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("ecic_confidence_interval: q must lie in (0,1)");
    if (!(d_floor > 1.0))
        throw std::invalid_argument("ecic_confidence_interval: d_floor must exceed 1");

    const double treated = extreme_quantile(efit.fit_11, q);
    const double counterfactual =
        counterfactual_tail_quantile(efit.fit_00, efit.fit_01, efit.fit_10, q);
    if (!(counterfactual > 0.0))
        throw std::domain_error("non-positive counterfactual quantile");

    const double tau = treated - counterfactual;
    const double d11 = tail_depth(efit.fit_11, q);
    const bool floored = d11 < d_floor;
    const double d_eff = floored ? d_floor : d11;

    const double a11 = efit.fit_11.alpha_hat;
    const double bracket = treated * treated / (a11 * a11) +
                           counterfactual * counterfactual *
                               detail::counterfactual_variance_factor(efit);
    const double se = std::log(d_eff) / std::sqrt(static_cast<double>(efit.fit_11.k)) *
                      std::sqrt(bracket);
    const double varsigma = treated / counterfactual;

    EffectEstimate est;
    est.q = q;
    est.tau_hat = tau;
    est.se = se;
    est.ci_low = tau - 1.96 * se;
    est.ci_high = tau + 1.96 * se;
    est.method = Method::ecic;
    est.tail = Tail::right;
    est.diagnostics["d_11"] = d11;
    est.diagnostics["varsigma_hat"] = varsigma;
    est.diagnostics["floor_applied"] = floored ? 1.0 : 0.0;
    est.diagnostics["varsigma_warning"] = (varsigma < 0.1 || varsigma > 10.0) ? 1.0 : 0.0;
    detail::put_fit_diagnostics(est.diagnostics, efit, q);
    return est;
}

/// Threshold selection plus optional tie-breaking jitter applied per cell
/// before fitting.
struct FitOptions {
    KRule k_rule{};
    bool jitter_ties = false;
    std::uint64_t jitter_seed = 0;
};

/// Per-cell sort, threshold-count selection, and Hill fit. A failing cell
/// aborts with its (g,t) label prefixed to the cause.
inline EcicFit fit_ecic(const QuadData& data, const FitOptions& opts = {}) {
    EcicFit out;
    const struct {
        int g, t;
        TailFit* fit;
        bool* fallback;
    } slots[] = {{0, 0, &out.fit_00, &out.fallback_00},
                 {0, 1, &out.fit_01, &out.fallback_01},
                 {1, 0, &out.fit_10, &out.fallback_10},
                 {1, 1, &out.fit_11, &out.fallback_11}};
    for (const auto& slot : slots) {
        try {
            const CellSample& raw = data.cell(slot.g, slot.t);
            const CellSample cell =
                opts.jitter_ties
                    ? jitter_ties(raw, child_seed(opts.jitter_seed,
                                                  static_cast<std::uint64_t>(slot.g * 2 + slot.t)))
                    : raw;
            const SortedSample sorted = sort_descending(cell);
            const KChoice choice = select_k(sorted, opts.k_rule);
            *slot.fit = hill_estimate(sorted, choice.k);
            *slot.fallback = choice.fallback;
        } catch (const std::exception& e) {
            throw std::runtime_error("cell " + cell_label(slot.g, slot.t) + ": " + e.what());
        }
    }
    return out;
}

/// Left-tail effect at level q via a strictly decreasing transform: run the
/// right-tail pipeline at 1-q on transformed data, invert the two quantiles,
/// and map each variance component back with the inverse's derivative.
inline EffectEstimate estimate_left_tail(const QuadData& data, double q,
                                         TailTransform transform, const FitOptions& opts = {},
                                         double d_floor = 10.0) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("estimate_left_tail: q must lie in (0,1)");
    if (transform == TailTransform::identity)
        throw std::invalid_argument(
            "estimate_left_tail: transform must be strictly decreasing (negate or reciprocal)");
    if (!(d_floor > 1.0))
        throw std::invalid_argument("estimate_left_tail: d_floor must exceed 1");

    const QuadData flipped = apply_transform(data, transform);
    const EcicFit efit = fit_ecic(flipped, opts);
    const double p = 1.0 - q;

    const double treated_t = extreme_quantile(efit.fit_11, p);
    const double counter_t =
        counterfactual_tail_quantile(efit.fit_00, efit.fit_01, efit.fit_10, p);
    if (!(counter_t > 0.0)) throw std::domain_error("non-positive counterfactual quantile");

    const double treated = invert_transform(treated_t, transform);
    const double counterfactual = invert_transform(counter_t, transform);
    const double tau = treated - counterfactual;

    const double d11 = tail_depth(efit.fit_11, p);
    const bool floored = d11 < d_floor;
    const double d_eff = floored ? d_floor : d11;

    const double w_treated = invert_transform_abs_derivative(treated_t, transform);
    const double w_counter = invert_transform_abs_derivative(counter_t, transform);
    const double a11 = efit.fit_11.alpha_hat;
    const double bracket =
        (w_treated * treated_t) * (w_treated * treated_t) / (a11 * a11) +
        (w_counter * counter_t) * (w_counter * counter_t) *
            detail::counterfactual_variance_factor(efit);
    const double se = std::log(d_eff) / std::sqrt(static_cast<double>(efit.fit_11.k)) *
                      std::sqrt(bracket);
    const double varsigma = treated_t / counter_t;

    EffectEstimate est;
    est.q = q;
    est.tau_hat = tau;
    est.se = se;
    est.ci_low = tau - 1.96 * se;
    est.ci_high = tau + 1.96 * se;
    est.method = Method::ecic;
    est.tail = Tail::left;
    est.transform = transform;
    est.diagnostics["d_11"] = d11;
    est.diagnostics["varsigma_hat"] = varsigma;
    est.diagnostics["floor_applied"] = floored ? 1.0 : 0.0;
    est.diagnostics["varsigma_warning"] = (varsigma < 0.1 || varsigma > 10.0) ? 1.0 : 0.0;
    detail::put_fit_diagnostics(est.diagnostics, efit, p);
    return est;
}

/// Dispatch configuration for the blended estimator: tail estimation at
/// extreme levels, the conventional plug-in in between.
struct EstimateConfig {
    double extreme_low = 0.05;
    double extreme_high = 0.95;
    double d_floor = 10.0;
    FitOptions fit{};
    TailTransform left_transform = TailTransform::negate;
    bool bootstrap_se = false;
    int bootstrap_reps = 200;
    std::uint64_t seed = 0;
};

/// Hard-switch blend: eCIC in the tails (right for q >= extreme_high, left
/// for q <= extreme_low), conventional CIC with its chosen standard error in
/// the interior.
inline EffectEstimate estimate_auto(const QuadData& data, double q,
                                    const EstimateConfig& cfg = {}) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("estimate_auto: q must lie in (0,1)");
    if (!(cfg.extreme_low > 0.0 && cfg.extreme_low < cfg.extreme_high && cfg.extreme_high < 1.0))
        throw std::invalid_argument("estimate_auto: dispatch bounds must satisfy 0 < low < high < 1");

    if (q >= cfg.extreme_high)
        return ecic_confidence_interval(fit_ecic(data, cfg.fit), q, cfg.d_floor);
    if (q <= cfg.extreme_low)
        return estimate_left_tail(data, q, cfg.left_transform, cfg.fit, cfg.d_floor);

    const CdfQuad cdfs = make_cdf_quad(data);
    const CicComposition comp = cic_composition(cdfs, q);
    const double se = cfg.bootstrap_se
                          ? cic_bootstrap_se(data, q, cfg.bootstrap_reps, cfg.seed)
                          : cic_analytic_se(data, q, cdfs);

    EffectEstimate est;
    est.q = q;
    est.tau_hat = comp.tau_hat;
    est.se = se;
    est.ci_low = comp.tau_hat - 1.96 * se;
    est.ci_high = comp.tau_hat + 1.96 * se;
    est.method = Method::cic;
    est.tail = q >= 0.5 ? Tail::right : Tail::left;
    est.diagnostics["q_prime"] = comp.q_prime;
    est.diagnostics["q_prime_clamped"] = comp.q_prime_clamped ? 1.0 : 0.0;
    est.diagnostics["bootstrap_se"] = cfg.bootstrap_se ? 1.0 : 0.0;
    return est;
}

}  // namespace ecic
