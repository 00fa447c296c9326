#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecic {

/// Observed outcomes for one (group g, period t) cell of a two-by-two design.
struct CellSample {
    std::vector<double> outcomes;
    int g = 0;
    int t = 0;
};

/// The four cells of a two-group / two-period design.
struct QuadData {
    CellSample cell_00;  // g=0, t=0
    CellSample cell_01;  // g=0, t=1
    CellSample cell_10;  // g=1, t=0
    CellSample cell_11;  // g=1, t=1

    const CellSample& cell(int g, int t) const {
        if (g == 0) return t == 0 ? cell_00 : cell_01;
        return t == 0 ? cell_10 : cell_11;
    }
    CellSample& cell(int g, int t) {
        if (g == 0) return t == 0 ? cell_00 : cell_01;
        return t == 0 ? cell_10 : cell_11;
    }
};

inline std::string cell_label(int g, int t) {
    return std::to_string(g) + std::to_string(t);
}

inline void validate_cell(const CellSample& sample) {
    if (sample.outcomes.empty())
        throw std::invalid_argument("empty cell");
    for (double y : sample.outcomes)
        if (!std::isfinite(y))
            throw std::invalid_argument("non-finite outcome in cell " +
                                        cell_label(sample.g, sample.t));
}

/// Outcomes in non-increasing order; descending[j-1] is the j-th largest Y^(j).
struct SortedSample {
    std::vector<double> descending;
    int n() const { return static_cast<int>(descending.size()); }

    // 1-based order statistic Y^(j).
    double order_stat(int j) const { return descending[static_cast<std::size_t>(j) - 1]; }
};

/// Non-increasing rearrangement, stable across ties.
inline SortedSample sort_descending(const CellSample& sample) {
    validate_cell(sample);
    SortedSample out;
    out.descending = sample.outcomes;
    std::stable_sort(out.descending.begin(), out.descending.end(),
                     [](double a, double b) { return a > b; });
    return out;
}

/// Strictly monotone maps that carry a left-tail problem into the right tail.
/// negate suits outcomes unbounded below; reciprocal suits strictly positive
/// outcomes whose interesting tail sits near zero.
enum class TailTransform { identity, negate, reciprocal };

inline const char* transform_name(TailTransform tr) {
    switch (tr) {
        case TailTransform::identity: return "identity";
        case TailTransform::negate: return "negate";
        default: return "reciprocal";
    }
}

inline TailTransform transform_from_name(const std::string& name) {
    if (name == "identity") return TailTransform::identity;
    if (name == "negate") return TailTransform::negate;
    if (name == "reciprocal") return TailTransform::reciprocal;
    throw std::invalid_argument("unknown transform: " + name);
}

inline double apply_transform(double y, TailTransform tr) {
    switch (tr) {
        case TailTransform::identity: return y;
        case TailTransform::negate: return -y;
        default:
            if (y <= 0.0)
                throw std::domain_error("reciprocal transform requires strictly positive outcomes");
            return 1.0 / y;
    }
}

inline CellSample apply_transform(const CellSample& sample, TailTransform tr) {
    CellSample out;
    out.g = sample.g;
    out.t = sample.t;
    out.outcomes.reserve(sample.outcomes.size());
    for (double y : sample.outcomes) out.outcomes.push_back(apply_transform(y, tr));
    return out;
}

inline QuadData apply_transform(const QuadData& data, TailTransform tr) {
    return QuadData{apply_transform(data.cell_00, tr), apply_transform(data.cell_01, tr),
                    apply_transform(data.cell_10, tr), apply_transform(data.cell_11, tr)};
}

/// Exact scalar inverse of apply_transform on its admissible domain.
inline double invert_transform(double value, TailTransform tr) {
    switch (tr) {
        case TailTransform::identity: return value;
        case TailTransform::negate: return -value;
        default:
            if (value == 0.0) throw std::domain_error("reciprocal transform: cannot invert 0");
            return 1.0 / value;
    }
}

/// |d/dx inverse-transform(x)|, used to map tail variances back to the
/// original scale.
inline double invert_transform_abs_derivative(double value, TailTransform tr) {
    switch (tr) {
        case TailTransform::identity: return 1.0;
        case TailTransform::negate: return 1.0;
        default:
            if (value == 0.0) throw std::domain_error("reciprocal transform: cannot invert 0");
            return 1.0 / (value * value);
    }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Break exact ties by adding seeded uniform noise on [0, g/2), g the minimal
/// positive gap between distinct values. Opt-in mitigation for rounded data
/// (e.g. gram-rounded weights); relative order of distinct values is kept.
inline CellSample jitter_ties(const CellSample& sample, std::uint64_t seed) {
    validate_cell(sample);
    std::vector<double> sorted = sample.outcomes;
    std::sort(sorted.begin(), sorted.end());
    double min_gap = 0.0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double gap = sorted[i] - sorted[i - 1];
        if (gap > 0.0 && (min_gap == 0.0 || gap < min_gap)) min_gap = gap;
    }
    if (min_gap == 0.0)
        throw std::domain_error("jitter_ties: all outcomes identical in cell " +
                                cell_label(sample.g, sample.t));

    CellSample out;
    out.g = sample.g;
    out.t = sample.t;
    out.outcomes.reserve(sample.outcomes.size());
    std::uint64_t state = seed ^ 0xD1B54A32D192ED03ULL;
    for (double y : sample.outcomes) {
        double u = static_cast<double>(detail::splitmix64(state) >> 11) * 0x1p-53;
        out.outcomes.push_back(y + u * 0.5 * min_gap);
    }
    return out;
}

}  // namespace ecic
