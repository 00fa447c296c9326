#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecic/classic.hpp"
#include "ecic/extreme.hpp"
#include "ecic/parallel.hpp"
#include "ecic/rng.hpp"
#include "ecic/sample.hpp"
#include "ecic/special.hpp"

namespace ecic {

/// Data-generating design: Bernoulli group/period rates, Beta shapes for the
/// control-group heterogeneity, Student-t degrees of freedom, total size.
struct SimDesign {
    double pi_g = 0.1;
    double pi_t = 0.5;
    double pi_a = 1.0;
    double pi_b = 2.0;
    double alpha_dof = 10.0;
    int n = 5000;
    std::uint64_t seed = 0;
};

inline void validate_design(const SimDesign& design) {
    if (!(design.pi_g > 0.0 && design.pi_g < 1.0 && design.pi_t > 0.0 && design.pi_t < 1.0))
        throw std::invalid_argument("SimDesign: group/period rates must lie in (0,1)");
    if (!(design.pi_a > 0.0 && design.pi_b > 0.0))
        throw std::invalid_argument("SimDesign: Beta shapes must be positive");
    if (!(design.alpha_dof > 0.0))
        throw std::invalid_argument("SimDesign: degrees of freedom must be positive");
    if (design.n < 100) throw std::invalid_argument("SimDesign: n must be >= 100");
}

struct GeneratedObservation {
    double y = 0.0;
    int g = 0;
    int t = 0;
    int i_treat = 0;
    double u = 0.0;  // latent heterogeneity draw, kept for debugging
};

/// One observation: group and period flags, conditional heterogeneity draw,
/// and the realized outcome picked between the two potential outcomes.
inline GeneratedObservation draw_observation(const SimDesign& design, Rng& rng) {
    GeneratedObservation obs;
    obs.g = rng.bernoulli(design.pi_g) ? 1 : 0;
    obs.t = rng.bernoulli(design.pi_t) ? 1 : 0;
    const double raw = rng.uniform01();
    obs.u = obs.g == 0 ? beta_quantile(raw, design.pi_a, design.pi_b) : raw;
    obs.i_treat = obs.g * obs.t;
    const double base = student_t_quantile(obs.u, design.alpha_dof);
    obs.y = obs.i_treat == 1 ? base + obs.u + 1.0 : base + obs.t;
    return obs;
}

inline std::vector<GeneratedObservation> generate_observations(const SimDesign& design,
                                                               std::uint64_t replicate) {
    validate_design(design);
    Rng rng = Rng::child(design.seed, replicate);
    std::vector<GeneratedObservation> out(static_cast<std::size_t>(design.n));
    for (auto& obs : out) obs = draw_observation(design, rng);
    return out;
}

/// Seeded replicate of the design, partitioned into the four cells. The
/// whole draw is repeated on the same stream while any cell is empty;
/// `redraws`, when given, reports how many repeats occurred.
inline QuadData generate_dataset(const SimDesign& design, std::uint64_t replicate,
                                 int* redraws = nullptr) {
    validate_design(design);
    Rng rng = Rng::child(design.seed, replicate);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        QuadData quad;
        for (int g = 0; g < 2; ++g)
            for (int t = 0; t < 2; ++t) {
                quad.cell(g, t).g = g;
                quad.cell(g, t).t = t;
                quad.cell(g, t).outcomes.reserve(
                    static_cast<std::size_t>(design.n / 2));
            }
        for (int i = 0; i < design.n; ++i) {
            const GeneratedObservation obs = draw_observation(design, rng);
            quad.cell(obs.g, obs.t).outcomes.push_back(obs.y);
        }
        const bool complete = !quad.cell_00.outcomes.empty() && !quad.cell_01.outcomes.empty() &&
                              !quad.cell_10.outcomes.empty() && !quad.cell_11.outcomes.empty();
        if (complete) {
            if (redraws) *redraws = attempt;
            return quad;
        }
    }
    throw std::runtime_error("generate_dataset: could not fill all four cells");
}

/// Known effect of the design: the treatment adds exactly U, so the q-level
/// effect is q itself.
inline double true_tau(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("true_tau: q must lie in (0,1)");
    return q;
}

/// Per-level aggregate over replicates.
struct QStat {
    double q = 0.0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double iqr_low = 0.0;
    double iqr_high = 0.0;
    double coverage_rate = 0.0;
    double mean_se = 0.0;
    double sd_estimate = 0.0;
    int failures = 0;
    int successes = 0;
};

struct ExperimentResult {
    SimDesign design;
    Method method = Method::ecic;
    bool with_coverage = false;
    int reps = 0;
    std::vector<QStat> stats;
};

namespace detail {

struct ReplicateEstimate {
    bool ok = false;
    double tau = 0.0;
    double se = 0.0;
};

// Estimate every level of the grid on one dataset with the tagged method.
// Tail fits and sorted CDFs are shared across levels; a per-level throw marks
// only that level failed.
inline void estimate_replicate(const QuadData& quad, const std::vector<double>& q_grid,
                               Method method, bool with_coverage, const EstimateConfig& cfg,
                               ReplicateEstimate* out) {
    if (method == Method::cic) {
        std::optional<CdfQuad> cdfs;
        try {
            cdfs = make_cdf_quad(quad);
        } catch (const std::exception&) {
            return;  // all levels fail
        }
        for (std::size_t i = 0; i < q_grid.size(); ++i) {
            try {
                const double tau = cic_point_estimate(*cdfs, q_grid[i]);
                const double se =
                    with_coverage ? cic_analytic_se(quad, q_grid[i], *cdfs) : 0.0;
                out[i] = ReplicateEstimate{true, tau, se};
            } catch (const std::exception&) {
            }
        }
        return;
    }

    std::optional<EcicFit> right_fit;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        const double q = q_grid[i];
        try {
            if (q >= 0.5) {
                if (!right_fit) right_fit = fit_ecic(quad, cfg.fit);
                if (with_coverage) {
                    const EffectEstimate est =
                        ecic_confidence_interval(*right_fit, q, cfg.d_floor);
                    out[i] = ReplicateEstimate{true, est.tau_hat, est.se};
                } else {
                    out[i] = ReplicateEstimate{true, ecic_point_estimate(*right_fit, q), 0.0};
                }
            } else {
                const EffectEstimate est =
                    estimate_left_tail(quad, q, cfg.left_transform, cfg.fit, cfg.d_floor);
                out[i] = ReplicateEstimate{true, est.tau_hat, est.se};
            }
        } catch (const std::exception&) {
        }
    }
}

inline ExperimentResult run_experiment(const SimDesign& design,
                                       const std::vector<double>& q_grid, int reps,
                                       Method method, bool with_coverage,
                                       const EstimateConfig& cfg) {
    validate_design(design);
    if (reps < 1) throw std::invalid_argument("experiment: reps must be >= 1");
    if (q_grid.empty()) throw std::invalid_argument("experiment: empty q grid");
    for (double q : q_grid)
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("experiment: q grid must lie inside (0,1)");

    const std::size_t nq = q_grid.size();
    std::vector<ReplicateEstimate> table(static_cast<std::size_t>(reps) * nq);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        const QuadData quad = generate_dataset(design, r);
        estimate_replicate(quad, q_grid, method, with_coverage, cfg,
                           table.data() + r * nq);
    });

    ExperimentResult result;
    result.design = design;
    result.method = method;
    result.with_coverage = with_coverage;
    result.reps = reps;
    result.stats.resize(nq);

    for (std::size_t i = 0; i < nq; ++i) {
        QStat& stat = result.stats[i];
        stat.q = q_grid[i];
        std::vector<double> taus;
        taus.reserve(static_cast<std::size_t>(reps));
        double se_sum = 0.0;
        int covered = 0;
        for (int r = 0; r < reps; ++r) {
            const ReplicateEstimate& re = table[static_cast<std::size_t>(r) * nq + i];
            if (!re.ok) {
                ++stat.failures;
                continue;
            }
            taus.push_back(re.tau);
            if (with_coverage) {
                se_sum += re.se;
                const double truth = true_tau(q_grid[i]);
                if (re.tau - 1.96 * re.se <= truth && truth <= re.tau + 1.96 * re.se)
                    ++covered;
            }
        }
        stat.successes = static_cast<int>(taus.size());
        if (stat.failures > 0.2 * reps)
            throw std::runtime_error("experiment: failure rate above 20% at q = " +
                                     std::to_string(q_grid[i]));

        double mean = 0.0;
        for (double tau : taus) mean += tau;
        mean /= static_cast<double>(taus.size());
        stat.mean_estimate = mean;
        stat.bias = mean - true_tau(q_grid[i]);
        std::vector<double> sorted = taus;
        std::sort(sorted.begin(), sorted.end());
        EmpiricalCdf cdf{std::move(sorted)};
        stat.iqr_low = ecdf_quantile(cdf, 0.25);
        stat.iqr_high = ecdf_quantile(cdf, 0.75);
        stat.sd_estimate = taus.size() > 1 ? sample_sd(taus) : 0.0;
        if (with_coverage) {
            stat.coverage_rate = static_cast<double>(covered) / stat.successes;
            stat.mean_se = se_sum / stat.successes;
        }
    }
    return result;
}

}  // namespace detail

/// Mean, bias, and interquartile band of the tagged estimator over seeded
/// replicates of the design. Failed replicates are counted and excluded; a
/// per-level failure rate above 20% aborts.
inline ExperimentResult run_bias_experiment(const SimDesign& design,
                                            const std::vector<double>& q_grid, int reps,
                                            Method method, const EstimateConfig& cfg = {}) {
    return detail::run_experiment(design, q_grid, reps, method, false, cfg);
}

/// Bias statistics plus 95% CI coverage of the known effect and the mean
/// estimated standard error.
inline ExperimentResult run_coverage_experiment(const SimDesign& design,
                                                const std::vector<double>& q_grid, int reps,
                                                Method method, const EstimateConfig& cfg = {}) {
    return detail::run_experiment(design, q_grid, reps, method, true, cfg);
}

}  // namespace ecic
