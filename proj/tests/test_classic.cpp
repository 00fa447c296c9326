#include <catch2/catch_amalgamated.hpp>

#include "ecic/classic.hpp"

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace ecic;

namespace {

QuadData uniform_quad(int n_per_cell, std::uint64_t seed) {
    QuadData quad;
    Rng rng(seed);
    for (int g = 0; g < 2; ++g)
        for (int t = 0; t < 2; ++t) {
            quad.cell(g, t).g = g;
            quad.cell(g, t).t = t;
            quad.cell(g, t).outcomes = testutil::uniform_sample(n_per_cell, rng);
        }
    return quad;
}

}  // namespace

TEST_CASE("ecdf_eval step values") {
    const EmpiricalCdf cdf = make_ecdf(testutil::make_cell({1, 2, 3, 4}));
    CHECK(ecdf_eval(cdf, 4.0) == 1.0);
    CHECK(ecdf_eval(cdf, 0.0) == 0.0);
    CHECK(ecdf_eval(cdf, 2.5) == 0.5);
    CHECK(ecdf_eval(cdf, 2.0) == 0.5);
}

TEST_CASE("ecdf_quantile left-inverse convention") {
    const EmpiricalCdf cdf = make_ecdf(testutil::make_cell({2, 4, 6, 8}));
    CHECK(ecdf_quantile(cdf, 0.5) == 4.0);
    CHECK(ecdf_quantile(cdf, 0.51) == 6.0);
    CHECK(ecdf_quantile(make_ecdf(testutil::make_cell({5})), 0.99) == 5.0);
    CHECK(ecdf_quantile(cdf, 1.0) == 8.0);
    CHECK_THROWS(ecdf_quantile(cdf, 0.0));
    CHECK_THROWS(ecdf_quantile(cdf, 1.5));
}

TEST_CASE("left-inverse contract holds on random samples") {
    Rng rng(101);
    for (int rep = 0; rep < 50; ++rep) {
        const auto values = testutil::uniform_sample(1 + static_cast<int>(rng.index(60)), rng);
        const EmpiricalCdf cdf = make_ecdf(testutil::make_cell(values));
        for (int j = 0; j < 10; ++j) {
            const double q = rng.uniform01();
            if (q <= 0.0) continue;
            const double value = ecdf_quantile(cdf, q);
            CHECK(ecdf_eval(cdf, value) >= q);
            CHECK(std::count(values.begin(), values.end(), value) > 0);
        }
    }
}

TEST_CASE("cic_point_estimate hand-worked composition") {
    QuadData quad;
    quad.cell_00 = testutil::make_cell({1, 2, 3, 4}, 0, 0);
    quad.cell_10 = testutil::make_cell({2, 4, 6, 8}, 1, 0);
    quad.cell_01 = testutil::make_cell({2, 3, 4, 5}, 0, 1);
    quad.cell_11 = testutil::make_cell({5, 6, 7, 9}, 1, 1);
    CHECK(cic_point_estimate(quad, 0.5) == 1.0);
}

TEST_CASE("cic_point_estimate vanishes on identical cells") {
    Rng rng(55);
    const QuadData quad = testutil::same_cells(testutil::uniform_sample(137, rng));
    const CdfQuad cdfs = make_cdf_quad(quad);
    for (int i = 1; i <= 20; ++i) CHECK(cic_point_estimate(cdfs, i / 21.0) == 0.0);
}

TEST_CASE("cic_point_estimate is location invariant") {
    Rng rng(56);
    for (int rep = 0; rep < 20; ++rep) {
        const QuadData quad = uniform_quad(80, 1000 + rep);
        const double shift = (rng.uniform01() - 0.5) * 20;
        QuadData shifted = quad;
        for (int g = 0; g < 2; ++g)
            for (int t = 0; t < 2; ++t)
                for (auto& y : shifted.cell(g, t).outcomes) y += shift;
        const double q = 0.25 + 0.5 * rng.uniform01();
        const double a = cic_point_estimate(quad, q);
        const double b = cic_point_estimate(shifted, q);
        CHECK(std::fabs(a - b) < 1e-9 * (1.0 + std::fabs(shift)));
    }
}

TEST_CASE("adding a constant to cell 11 shifts the estimate by that constant") {
    QuadData quad = uniform_quad(60, 9);
    const double q = 0.4;
    const double before = cic_point_estimate(quad, q);
    for (auto& y : quad.cell_11.outcomes) y += 2.5;
    CHECK(std::fabs(cic_point_estimate(quad, q) - before - 2.5) < 1e-12);
}

TEST_CASE("epanechnikov_density point values") {
    CHECK(epanechnikov_density(testutil::make_cell({0}), 0.0, 1.0) == 0.75);
    CHECK(epanechnikov_density(testutil::make_cell({0}), 2.0, 1.0) == 0.0);
    CHECK(epanechnikov_density(testutil::make_cell({0, 0}), 0.5, 1.0) == 0.5625);
    CHECK_THROWS(epanechnikov_density(testutil::make_cell({0}), 0.0, 0.0));
}

TEST_CASE("epanechnikov_density integrates to one") {
    Rng rng(77);
    const auto values = testutil::uniform_sample(40, rng);
    const CellSample cell = testutil::make_cell(values);
    const double h = silverman_bandwidth(cell);
    const double integral = testutil::simpson(
        [&](double y) { return epanechnikov_density(cell, y, h); }, -0.5, 1.5, 40000);
    CHECK(std::fabs(integral - 1.0) < 1e-6);

    for (double y : {-0.2, 0.1, 0.5, 0.9, 1.4})
        CHECK(epanechnikov_density(cell, y, h) >= 0.0);
}

TEST_CASE("silverman_bandwidth on standard normal draws") {
    std::mt19937_64 engine(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    double acc = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        std::vector<double> values(1000);
        for (auto& v : values) v = normal(engine);
        acc += silverman_bandwidth(testutil::make_cell(values));
    }
    const double expect = 0.9 * std::pow(1000.0, -0.2);
    CHECK(testutil::rel_err(acc / seeds, expect) < 0.15);
}

TEST_CASE("silverman_bandwidth scales linearly and rejects degenerate input") {
    Rng rng(78);
    const auto values = testutil::uniform_sample(200, rng);
    const double h = silverman_bandwidth(testutil::make_cell(values));
    auto scaled = values;
    for (auto& v : scaled) v *= 5.0;
    CHECK(testutil::rel_err(silverman_bandwidth(testutil::make_cell(scaled)), 5.0 * h) < 1e-12);

    CHECK_THROWS(silverman_bandwidth(testutil::make_cell({1.0})));
    CHECK_THROWS_WITH(silverman_bandwidth(testutil::make_cell({2, 2, 2, 2})),
                      "degenerate sample for bandwidth");
}

TEST_CASE("analytic and bootstrap standard errors agree on uniform cells") {
    // Cross-check oracle at desk scale; the acceptance suite runs the full one.
    double analytic_acc = 0.0, bootstrap_acc = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        const QuadData quad = uniform_quad(2000, 500 + s);
        analytic_acc += cic_analytic_se(quad, 0.5);
        bootstrap_acc += cic_bootstrap_se(quad, 0.5, 200, 500 + s);
    }
    CHECK(testutil::rel_err(analytic_acc / seeds, bootstrap_acc / seeds) < 0.25);
}

TEST_CASE("analytic SE tracks the fresh-data Monte Carlo dispersion") {
    const int reps = 400;
    std::vector<double> taus;
    taus.reserve(reps);
    for (int r = 0; r < reps; ++r) taus.push_back(cic_point_estimate(uniform_quad(2000, 9000 + r), 0.5));
    const double mc_sd = sample_sd(taus);

    double se_acc = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) se_acc += cic_analytic_se(uniform_quad(2000, 30 + s), 0.5);
    CHECK(testutil::rel_err(se_acc / seeds, mc_sd) < 0.25);
}

TEST_CASE("analytic SE degenerates at extreme q") {
    const QuadData quad = uniform_quad(200, 4);
    const double base = cic_analytic_se(quad, 0.5);
    bool blew_up = false;
    try {
        blew_up = cic_analytic_se(quad, 0.999) > 10.0 * base;
    } catch (const std::domain_error&) {
        blew_up = true;  // vanishing density is the other sanctioned outcome
    }
    CHECK(blew_up);
}

TEST_CASE("analytic SE preconditions") {
    CHECK_THROWS(cic_analytic_se(uniform_quad(20, 1), 0.5));  // cells below 30
    CHECK_THROWS(cic_analytic_se(uniform_quad(100, 1), 0.0));
}

TEST_CASE("bootstrap SE is deterministic and vanishes for constant cells") {
    const QuadData quad = uniform_quad(150, 6);
    const double a = cic_bootstrap_se(quad, 0.5, 100, 42);
    const double b = cic_bootstrap_se(quad, 0.5, 100, 42);
    CHECK(a == b);
    CHECK(a > 0.0);
    CHECK(cic_bootstrap_se(quad, 0.5, 100, 43) != a);

    const QuadData constant = testutil::same_cells({3.0, 3.0, 3.0, 3.0, 3.0});
    CHECK(cic_bootstrap_se(constant, 0.5, 100, 1) == 0.0);

    CHECK_THROWS(cic_bootstrap_se(quad, 0.5, 99, 1));
}

TEST_CASE("classic_estimate bundles CI bounds") {
    const QuadData quad = uniform_quad(400, 12);
    const ClassicEstimate est = classic_estimate(quad, 0.5, false);
    CHECK(est.ci_low == est.tau_hat - 1.96 * est.se);
    CHECK(est.ci_high == est.tau_hat + 1.96 * est.se);
    CHECK(est.se >= 0.0);
}
