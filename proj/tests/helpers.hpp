#pragma once

#include <cmath>
#include <vector>

#include "ecic/rng.hpp"
#include "ecic/sample.hpp"

namespace testutil {

// Exact Pareto draws with CDF 1 - y^{-alpha}, y >= 1, by inverse transform.
inline std::vector<double> pareto_sample(int n, double alpha, ecic::Rng& rng) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& y : out) y = std::pow(rng.uniform01(), -1.0 / alpha);
    return out;
}

inline ecic::CellSample make_cell(std::vector<double> values, int g = 0, int t = 0) {
    return ecic::CellSample{std::move(values), g, t};
}

inline ecic::QuadData same_cells(const std::vector<double>& values) {
    ecic::QuadData quad;
    for (int g = 0; g < 2; ++g)
        for (int t = 0; t < 2; ++t) {
            quad.cell(g, t).outcomes = values;
            quad.cell(g, t).g = g;
            quad.cell(g, t).t = t;
        }
    return quad;
}

inline std::vector<double> uniform_sample(int n, ecic::Rng& rng) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& y : out) y = rng.uniform01();
    return out;
}

// Composite Simpson integral of f on [a, b].
template <typename Fn>
double simpson(Fn&& f, double a, double b, int intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    return acc * h / 3.0;
}

inline double rel_err(double value, double reference) {
    return std::fabs(value - reference) / std::fabs(reference);
}

}  // namespace testutil
