#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecic/extreme.hpp"
#include "ecic/simulate.hpp"

namespace ecic {

/// Shortest decimal string that reads back to the same double.
inline std::string double_to_string(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_double_field(const std::string& field, int row, const char* column) {
    double value = 0.0;
    const char* begin = field.c_str();
    const char* end = begin + field.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end || field.empty())
        throw std::runtime_error("row " + std::to_string(row) + ": unparsable " + column +
                                 " value '" + field + "'");
    return value;
}

}  // namespace detail

/// Read (y,g,t) microdata with a named header row, in any column order, into
/// the four cells. Row numbers in errors count physical lines, header = 1.
inline QuadData parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = detail::split_csv_line(line);
    int col_y = -1, col_g = -1, col_t = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::to_lower(header[i]);
        if (name == "y") col_y = static_cast<int>(i);
        else if (name == "g") col_g = static_cast<int>(i);
        else if (name == "t") col_t = static_cast<int>(i);
    }
    if (col_y < 0) throw std::runtime_error("missing column: y");
    if (col_g < 0) throw std::runtime_error("missing column: g");
    if (col_t < 0) throw std::runtime_error("missing column: t");
    const int needed = std::max({col_y, col_g, col_t}) + 1;

    QuadData quad;
    for (int g = 0; g < 2; ++g)
        for (int t = 0; t < 2; ++t) {
            quad.cell(g, t).g = g;
            quad.cell(g, t).t = t;
        }

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (static_cast<int>(fields.size()) < needed)
            throw std::runtime_error("row " + std::to_string(row) + ": expected at least " +
                                     std::to_string(needed) + " columns");

        const double y = detail::parse_double_field(fields[static_cast<std::size_t>(col_y)],
                                                    row, "y");
        if (!std::isfinite(y))
            throw std::runtime_error("row " + std::to_string(row) + ": unparsable y value '" +
                                     fields[static_cast<std::size_t>(col_y)] + "'");
        const double g_raw = detail::parse_double_field(fields[static_cast<std::size_t>(col_g)],
                                                        row, "g");
        const double t_raw = detail::parse_double_field(fields[static_cast<std::size_t>(col_t)],
                                                        row, "t");
        if (g_raw != 0.0 && g_raw != 1.0)
            throw std::runtime_error("row " + std::to_string(row) + ": non-binary g value '" +
                                     fields[static_cast<std::size_t>(col_g)] + "'");
        if (t_raw != 0.0 && t_raw != 1.0)
            throw std::runtime_error("row " + std::to_string(row) + ": non-binary t value '" +
                                     fields[static_cast<std::size_t>(col_t)] + "'");
        quad.cell(static_cast<int>(g_raw), static_cast<int>(t_raw)).outcomes.push_back(y);
    }

    for (int g = 0; g < 2; ++g)
        for (int t = 0; t < 2; ++t)
            if (quad.cell(g, t).outcomes.empty())
                throw std::runtime_error("empty cell " + cell_label(g, t));
    return quad;
}

inline QuadData parse_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return parse_csv(in);
}

inline void write_csv(const QuadData& quad, std::ostream& out) {
    out << "y,g,t\n";
    for (int g = 0; g < 2; ++g)
        for (int t = 0; t < 2; ++t)
            for (double y : quad.cell(g, t).outcomes)
                out << double_to_string(y) << ',' << g << ',' << t << '\n';
}

/// Estimation request: levels, estimator/tail overrides, tuning knobs.
struct RunConfig {
    std::vector<double> q_list;
    std::string method = "auto";  // auto | cic | ecic
    std::string tail = "auto";    // auto | right | left
    TailTransform transform = TailTransform::negate;
    KRule k_rule{};
    bool jitter_ties = false;
    double d_floor = 10.0;
    double extreme_low = 0.05;
    double extreme_high = 0.95;
    bool bootstrap_se = false;
    int bootstrap_reps = 200;
    std::uint64_t seed = 0;
};

struct RunOutcome {
    double q = 0.0;
    bool ok = false;
    EffectEstimate estimate;
    std::string error;
};

namespace detail {

inline EffectEstimate classic_effect(const QuadData& data, double q, const RunConfig& rc) {
    const CdfQuad cdfs = make_cdf_quad(data);
    const CicComposition comp = cic_composition(cdfs, q);
    const double se = rc.bootstrap_se ? cic_bootstrap_se(data, q, rc.bootstrap_reps, rc.seed)
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
    est.diagnostics["bootstrap_se"] = rc.bootstrap_se ? 1.0 : 0.0;
    return est;
}

}  // namespace detail

inline EffectEstimate run_single(const QuadData& data, double q, const RunConfig& rc) {
    FitOptions fit{rc.k_rule, rc.jitter_ties, rc.seed};
    if (rc.method == "cic") return detail::classic_effect(data, q, rc);
    if (rc.method == "ecic") {
        const bool left = rc.tail == "left" || (rc.tail == "auto" && q < 0.5);
        if (left) return estimate_left_tail(data, q, rc.transform, fit, rc.d_floor);
        return ecic_confidence_interval(fit_ecic(data, fit), q, rc.d_floor);
    }
    EstimateConfig cfg;
    cfg.extreme_low = rc.extreme_low;
    cfg.extreme_high = rc.extreme_high;
    cfg.d_floor = rc.d_floor;
    cfg.fit = fit;
    cfg.left_transform = rc.transform;
    cfg.bootstrap_se = rc.bootstrap_se;
    cfg.bootstrap_reps = rc.bootstrap_reps;
    cfg.seed = rc.seed;
    return estimate_auto(data, q, cfg);
}

inline std::vector<RunOutcome> run_estimates(const QuadData& data, const RunConfig& rc) {
    std::vector<RunOutcome> out;
    out.reserve(rc.q_list.size());
    for (double q : rc.q_list) {
        RunOutcome outcome;
        outcome.q = q;
        try {
            outcome.estimate = run_single(data, q, rc);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        out.push_back(std::move(outcome));
    }
    return out;
}

inline nlohmann::ordered_json effect_to_json(const EffectEstimate& est) {
    nlohmann::ordered_json j;
    j["q"] = est.q;
    j["tau_hat"] = est.tau_hat;
    j["se"] = est.se;
    j["ci_low"] = est.ci_low;
    j["ci_high"] = est.ci_high;
    j["method"] = method_name(est.method);
    j["tail"] = tail_name(est.tail);
    j["transform"] = transform_name(est.transform);
    nlohmann::ordered_json diag;
    for (const auto& [key, value] : est.diagnostics) diag[key] = value;
    j["diagnostics"] = std::move(diag);
    return j;
}

inline nlohmann::ordered_json estimates_to_json(const std::vector<RunOutcome>& outcomes) {
    nlohmann::ordered_json report;
    report["schema"] = 1;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& outcome : outcomes) {
        if (outcome.ok) {
            rows.push_back(effect_to_json(outcome.estimate));
        } else {
            nlohmann::ordered_json row;
            row["q"] = outcome.q;
            row["error"] = outcome.error;
            rows.push_back(std::move(row));
        }
    }
    report["estimates"] = std::move(rows);
    return report;
}

inline std::string estimates_to_csv(const std::vector<RunOutcome>& outcomes) {
    std::string out = "q,tau_hat,se,ci_low,ci_high,method,tail,error\n";
    for (const auto& o : outcomes) {
        out += double_to_string(o.q);
        if (o.ok) {
            out += ',' + double_to_string(o.estimate.tau_hat);
            out += ',' + double_to_string(o.estimate.se);
            out += ',' + double_to_string(o.estimate.ci_low);
            out += ',' + double_to_string(o.estimate.ci_high);
            out += ',';
            out += method_name(o.estimate.method);
            out += ',';
            out += tail_name(o.estimate.tail);
            out += ",\n";
        } else {
            out += ",,,,,,," + o.error + "\n";
        }
    }
    return out;
}

inline nlohmann::ordered_json design_to_json(const SimDesign& design) {
    nlohmann::ordered_json j;
    j["pi_g"] = design.pi_g;
    j["pi_t"] = design.pi_t;
    j["pi_a"] = design.pi_a;
    j["pi_b"] = design.pi_b;
    j["alpha_dof"] = design.alpha_dof;
    j["n"] = design.n;
    j["seed"] = design.seed;
    return j;
}

inline nlohmann::ordered_json experiment_to_json(const ExperimentResult& result) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["design"] = design_to_json(result.design);
    j["method"] = method_name(result.method);
    j["reps"] = result.reps;
    j["with_coverage"] = result.with_coverage;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const QStat& stat : result.stats) {
        nlohmann::ordered_json row;
        row["q"] = stat.q;
        row["mean_estimate"] = stat.mean_estimate;
        row["bias"] = stat.bias;
        row["iqr_low"] = stat.iqr_low;
        row["iqr_high"] = stat.iqr_high;
        row["sd_estimate"] = stat.sd_estimate;
        if (result.with_coverage) {
            row["coverage_rate"] = stat.coverage_rate;
            row["mean_se"] = stat.mean_se;
        }
        row["failures"] = stat.failures;
        row["successes"] = stat.successes;
        rows.push_back(std::move(row));
    }
    j["results"] = std::move(rows);
    return j;
}

/// Tidy long-format table, one row per (q, statistic).
inline std::string experiment_to_tidy_csv(const ExperimentResult& result) {
    std::string out = "q,statistic,value,method,n,reps,seed\n";
    const std::string suffix = std::string(",") + method_name(result.method) + ',' +
                               std::to_string(result.design.n) + ',' +
                               std::to_string(result.reps) + ',' +
                               std::to_string(result.design.seed) + '\n';
    for (const QStat& stat : result.stats) {
        const std::string q_str = double_to_string(stat.q);
        auto emit = [&](const char* name, double value) {
            out += q_str + ',' + name + ',' + double_to_string(value) + suffix;
        };
        emit("mean_estimate", stat.mean_estimate);
        emit("bias", stat.bias);
        emit("iqr_low", stat.iqr_low);
        emit("iqr_high", stat.iqr_high);
        emit("sd_estimate", stat.sd_estimate);
        if (result.with_coverage) {
            emit("coverage_rate", stat.coverage_rate);
            emit("mean_se", stat.mean_se);
        }
        emit("failure_rate", static_cast<double>(stat.failures) / result.reps);
    }
    return out;
}

/// Level grid syntax: a single value, a comma list, or start:stop:step.
inline std::vector<double> parse_q_spec(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() != 3)
            throw std::runtime_error("q range must be start:stop:step");
        const double start = detail::parse_double_field(parts[0], 0, "q");
        const double stop = detail::parse_double_field(parts[1], 0, "q");
        const double step = detail::parse_double_field(parts[2], 0, "q");
        if (!(step > 0.0) || stop < start)
            throw std::runtime_error("q range must satisfy start <= stop, step > 0");
        for (int i = 0;; ++i) {
            const double q = start + i * step;
            if (q > stop + 1e-12) break;
            out.push_back(std::min(q, stop));
        }
    } else {
        std::stringstream ss(spec);
        std::string part;
        while (std::getline(ss, part, ',')) {
            part = detail::trim(part);
            if (part.empty()) continue;
            out.push_back(detail::parse_double_field(part, 0, "q"));
        }
    }
    if (out.empty()) throw std::runtime_error("empty q specification");
    for (double q : out)
        if (!(q > 0.0 && q < 1.0))
            throw std::runtime_error("q values must lie strictly inside (0,1)");
    return out;
}

}  // namespace ecic
