// Command-line front end: quantile treatment effect estimation from cell-level
// CSV microdata, Monte Carlo experiments against the known-truth design, and a
// per-cell tail-fit dump for diagnostics.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ecic/ecic.hpp"

namespace {

ecic::QuadData load_input(const std::string& path) {
    if (path.empty() || path == "-") return ecic::parse_csv(std::cin);
    return ecic::parse_csv_file(path);
}

ecic::KRule make_k_rule(const std::string& name, double power, double scale, double c_crit,
                        int window) {
    ecic::KRule rule;
    if (name == "fixed") rule.kind = ecic::KRule::Kind::fixed;
    else if (name == "guillou_hall") rule.kind = ecic::KRule::Kind::guillou_hall;
    else throw CLI::ValidationError("--k-rule must be guillou_hall or fixed");
    rule.power = power;
    rule.scale = scale;
    rule.c_crit = c_crit;
    rule.window = window;
    return rule;
}

int cmd_estimate(const ecic::RunConfig& rc, const std::string& input,
                 const std::string& format) {
    ecic::QuadData data;
    try {
        data = load_input(input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const std::vector<ecic::RunOutcome> outcomes = ecic::run_estimates(data, rc);
    if (format == "csv") {
        std::cout << ecic::estimates_to_csv(outcomes);
    } else {
        std::cout << ecic::estimates_to_json(outcomes).dump(2) << "\n";
    }
    for (const auto& outcome : outcomes)
        if (!outcome.ok) return 2;
    return 0;
}

int cmd_simulate(const ecic::SimDesign& design, const std::vector<double>& q_grid, int reps,
                 const std::string& method, const std::string& experiment,
                 const ecic::EstimateConfig& cfg, const std::string& output_dir) {
    const ecic::Method tag = method == "cic" ? ecic::Method::cic : ecic::Method::ecic;
    const bool coverage = experiment != "bias";
    ecic::ExperimentResult result;
    try {
        result = coverage ? ecic::run_coverage_experiment(design, q_grid, reps, tag, cfg)
                          : ecic::run_bias_experiment(design, q_grid, reps, tag, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    const std::string stem = std::string("experiment_") + ecic::method_name(tag);
    const std::string json_path = output_dir + "/" + stem + ".json";
    const std::string csv_path = output_dir + "/" + stem + ".csv";
    {
        std::ofstream json_out(json_path, std::ios::binary);
        std::ofstream csv_out(csv_path, std::ios::binary);
        if (!json_out || !csv_out) {
            std::cerr << "error: cannot write to output directory '" << output_dir << "'\n";
            return 1;
        }
        json_out << ecic::experiment_to_json(result).dump(2) << "\n";
        csv_out << ecic::experiment_to_tidy_csv(result);
    }

    for (const ecic::QStat& stat : result.stats) {
        std::cout << "q=" << ecic::double_to_string(stat.q)
                  << " mean=" << ecic::double_to_string(stat.mean_estimate)
                  << " bias=" << ecic::double_to_string(stat.bias);
        if (coverage)
            std::cout << " coverage=" << ecic::double_to_string(stat.coverage_rate)
                      << " mean_se=" << ecic::double_to_string(stat.mean_se);
        std::cout << " failures=" << stat.failures << "\n";
    }
    std::cout << "wrote " << json_path << " and " << csv_path << "\n";
    return 0;
}

int cmd_fit_tail(const std::string& input, const ecic::FitOptions& opts,
                 const std::string& transform_name) {
    ecic::QuadData data;
    try {
        data = load_input(input);
        const ecic::TailTransform transform = ecic::transform_from_name(transform_name);
        if (transform != ecic::TailTransform::identity)
            data = ecic::apply_transform(data, transform);
        const ecic::EcicFit efit = ecic::fit_ecic(data, opts);

        nlohmann::ordered_json j;
        j["schema"] = 1;
        j["transform"] = transform_name;
        nlohmann::ordered_json cells;
        const struct {
            const char* label;
            const ecic::TailFit* fit;
            bool fallback;
        } rows[] = {{"00", &efit.fit_00, efit.fallback_00},
                    {"01", &efit.fit_01, efit.fallback_01},
                    {"10", &efit.fit_10, efit.fallback_10},
                    {"11", &efit.fit_11, efit.fallback_11}};
        for (const auto& row : rows) {
            nlohmann::ordered_json cell;
            cell["k"] = row.fit->k;
            cell["threshold"] = row.fit->threshold;
            cell["alpha_hat"] = row.fit->alpha_hat;
            cell["n"] = row.fit->n;
            cell["k_fallback"] = row.fallback;
            cells[row.label] = std::move(cell);
        }
        j["cells"] = std::move(cells);
        std::cout << j.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantile treatment effects at extreme and intermediate quantiles"};
    app.require_subcommand(1);

    // shared knobs
    std::string input;
    std::string k_rule_name = "guillou_hall";
    double k_power = 0.5, k_scale = 2.0, c_crit = 1.25;
    int window = 5;
    bool jitter = false;
    std::uint64_t seed = 0;

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate effects at given levels from CSV data");
    std::string q_spec, method = "auto", tail = "auto", transform = "negate", format = "json";
    double d_floor = 10.0, extreme_low = 0.05, extreme_high = 0.95;
    std::string se_method = "analytic";
    int bootstrap_reps = 200;
    est->add_option("--input", input, "CSV file with columns y,g,t ('-' for stdin)");
    est->add_option("--q", q_spec, "levels: value, comma list, or start:stop:step")->required();
    est->add_option("--method", method, "auto | cic | ecic")
        ->check(CLI::IsMember({"auto", "cic", "ecic"}));
    est->add_option("--tail", tail, "auto | right | left")
        ->check(CLI::IsMember({"auto", "right", "left"}));
    est->add_option("--transform", transform, "left-tail transform: negate | reciprocal");
    est->add_option("--k-rule", k_rule_name, "guillou_hall | fixed");
    est->add_option("--k-power", k_power, "fixed rule exponent");
    est->add_option("--k-scale", k_scale, "fixed rule scale");
    est->add_option("--gh-crit", c_crit, "diagnostic critical value");
    est->add_option("--gh-window", window, "diagnostic smoothing width (odd)");
    est->add_flag("--jitter-ties", jitter, "break exact ties with seeded jitter");
    est->add_option("--d-floor", d_floor, "floor for the CI's log depth factor");
    est->add_option("--extreme-low", extreme_low, "left dispatch bound");
    est->add_option("--extreme-high", extreme_high, "right dispatch bound");
    est->add_option("--se-method", se_method, "analytic | bootstrap (conventional CIC only)")
        ->check(CLI::IsMember({"analytic", "bootstrap"}));
    est->add_option("--bootstrap-reps", bootstrap_reps, "bootstrap replicates")
        ->check(CLI::PositiveNumber);
    est->add_option("--seed", seed, "seed for bootstrap/jitter streams");
    est->add_option("--format", format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment with known truth");
    ecic::SimDesign design;
    std::string sim_q_spec = "0.9:0.995:0.005", sim_method = "ecic", experiment = "coverage";
    std::string output_dir = ".";
    int reps = 1000;
    sim->add_option("--n", design.n, "total sample size per replicate");
    sim->add_option("--reps", reps, "number of replicates")->check(CLI::PositiveNumber);
    sim->add_option("--q", sim_q_spec, "levels: value, comma list, or start:stop:step");
    sim->add_option("--method", sim_method, "ecic | cic")
        ->check(CLI::IsMember({"ecic", "cic"}));
    sim->add_option("--experiment", experiment, "coverage | bias")
        ->check(CLI::IsMember({"coverage", "bias"}));
    sim->add_option("--pi-g", design.pi_g, "treatment-group rate");
    sim->add_option("--pi-t", design.pi_t, "post-period rate");
    sim->add_option("--pi-a", design.pi_a, "Beta shape a for control heterogeneity");
    sim->add_option("--pi-b", design.pi_b, "Beta shape b for control heterogeneity");
    sim->add_option("--alpha-dof", design.alpha_dof, "Student-t degrees of freedom");
    sim->add_option("--seed", design.seed, "master seed");
    sim->add_option("--d-floor", d_floor, "floor for the CI's log depth factor");
    sim->add_option("--k-rule", k_rule_name, "guillou_hall | fixed");
    sim->add_option("--k-power", k_power, "fixed rule exponent");
    sim->add_option("--k-scale", k_scale, "fixed rule scale");
    sim->add_option("--output-dir", output_dir, "directory for JSON/CSV artifacts");

    // fit-tail
    auto* fit = app.add_subcommand("fit-tail", "Dump per-cell tail fits (debug)");
    std::string fit_transform = "identity";
    fit->add_option("--input", input, "CSV file with columns y,g,t ('-' for stdin)");
    fit->add_option("--k-rule", k_rule_name, "guillou_hall | fixed");
    fit->add_option("--k-power", k_power, "fixed rule exponent");
    fit->add_option("--k-scale", k_scale, "fixed rule scale");
    fit->add_option("--gh-crit", c_crit, "diagnostic critical value");
    fit->add_option("--gh-window", window, "diagnostic smoothing width (odd)");
    fit->add_flag("--jitter-ties", jitter, "break exact ties with seeded jitter");
    fit->add_option("--seed", seed, "seed for the jitter stream");
    fit->add_option("--transform", fit_transform, "identity | negate | reciprocal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (est->parsed()) {
            ecic::RunConfig rc;
            rc.q_list = ecic::parse_q_spec(q_spec);
            rc.method = method;
            rc.tail = tail;
            rc.transform = ecic::transform_from_name(transform);
            rc.k_rule = make_k_rule(k_rule_name, k_power, k_scale, c_crit, window);
            rc.jitter_ties = jitter;
            rc.d_floor = d_floor;
            rc.extreme_low = extreme_low;
            rc.extreme_high = extreme_high;
            rc.bootstrap_se = se_method == "bootstrap";
            rc.bootstrap_reps = bootstrap_reps;
            rc.seed = seed;
            return cmd_estimate(rc, input, format);
        }
        if (sim->parsed()) {
            ecic::EstimateConfig cfg;
            cfg.d_floor = d_floor;
            cfg.fit.k_rule = make_k_rule(k_rule_name, k_power, k_scale, c_crit, window);
            return cmd_simulate(design, ecic::parse_q_spec(sim_q_spec), reps, sim_method,
                                experiment, cfg, output_dir);
        }
        if (fit->parsed()) {
            ecic::FitOptions opts;
            opts.k_rule = make_k_rule(k_rule_name, k_power, k_scale, c_crit, window);
            opts.jitter_ties = jitter;
            opts.jitter_seed = seed;
            return cmd_fit_tail(input, opts, fit_transform);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
