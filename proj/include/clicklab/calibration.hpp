// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clicklab/errors.hpp"
#include "clicklab/multiplex.hpp"

namespace clicklab {

/// Quadratic energy-to-photon-number calibration n = a E^2 + b E + c.
struct CalibrationFit {
    double a = 0, b = 0, c = 0;
    double residual_rms = 0;

    double operator()(double energy) const { return (a * energy + b) * energy + c; }
};

struct CalPoint {
    double energy;
    double n;
};

/// Least-squares quadratic through (E_i, n_i), solved via the 3x3 normal
/// equations with partial pivoting. Needs at least three distinct energies.
inline CalibrationFit fit_quadratic_calibration(const std::vector<CalPoint>& points) {
    if (points.size() < 3) throw ValidationError("calibration: need at least 3 points");
    {
        std::vector<double> energies;
        for (const auto& p : points) energies.push_back(p.energy);
        std::sort(energies.begin(), energies.end());
        int distinct = 1;
        for (std::size_t i = 1; i < energies.size(); ++i)
            if (energies[i] != energies[i - 1]) ++distinct;
        if (distinct < 3) throw ValidationError("calibration: need at least 3 distinct energies");
    }

    // normal equations A x = r for x = (a, b, c) over basis (E^2, E, 1)
    std::array<std::array<double, 4>, 3> sys{};
    for (const auto& p : points) {
        const double basis[3] = {p.energy * p.energy, p.energy, 1.0};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) sys[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += basis[i] * basis[j];
            sys[static_cast<std::size_t>(i)][3] += basis[i] * p.n;
        }
    }

    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(sys[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]) >
                std::abs(sys[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
                pivot = row;
        std::swap(sys[static_cast<std::size_t>(col)], sys[static_cast<std::size_t>(pivot)]);
        double head = sys[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        if (std::abs(head) < 1e-12 * (1.0 + std::abs(sys[0][0])))
            throw ValidationError("calibration: degenerate system (collinear or duplicate energies)");
        for (int row = 0; row < 3; ++row) {
            if (row == col) continue;
            double factor = sys[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] / head;
            for (int j = col; j < 4; ++j)
                sys[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] -=
                    factor * sys[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
        }
    }

    CalibrationFit fit;
    fit.a = sys[0][3] / sys[0][0];
    fit.b = sys[1][3] / sys[1][1];
    fit.c = sys[2][3] / sys[2][2];
    double ss = 0;
    for (const auto& p : points) {
        double r = p.n - fit(p.energy);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(points.size()));
    return fit;
}

/// Disjoint half-open intervals [edges[k], edges[k+1]) defining outcomes
/// k = 0..K with K = edges.size() - 2.
struct BinningSpec {
    std::vector<double> edges;

    int K() const { return static_cast<int>(edges.size()) - 2; }
};

inline void validate(const BinningSpec& spec) {
    if (spec.edges.size() < 2) throw ValidationError("binning.edges: need at least 2 edges");
    for (std::size_t i = 1; i < spec.edges.size(); ++i)
        if (!(spec.edges[i] > spec.edges[i - 1]))
            throw ValidationError("binning.edges: must be strictly increasing at index " + std::to_string(i));
}

/// Outcome of a single reading; values on an edge land in the upper bin.
/// nullopt with the out-of-range side reported separately by bin_samples.
inline std::optional<int> bin_value(double v, const BinningSpec& spec) {
    if (v < spec.edges.front() || v >= spec.edges.back()) return std::nullopt;
    // last edge index with edges[k] <= v
    auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), v);
    return static_cast<int>(it - spec.edges.begin()) - 1;
}

struct BinCounts {
    std::vector<std::uint64_t> counts;  // per outcome k = 0..K
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
};

/// Histogram of raw readings; out-of-range values are reported, not dropped.
inline BinCounts bin_samples(const std::vector<double>& values, const BinningSpec& spec) {
    validate(spec);
    BinCounts out;
    out.counts.assign(static_cast<std::size_t>(spec.K()) + 1, 0);
    for (double v : values) {
        if (v < spec.edges.front()) {
            ++out.underflow;
        } else if (v >= spec.edges.back()) {
            ++out.overflow;
        } else {
            ++out.counts[static_cast<std::size_t>(*bin_value(v, spec))];
        }
    }
    return out;
}

/// Relative spread of the raw coincidence counts that were merged into one
/// occupation tuple; detectors with identical responses should show ~0.
struct AsymmetryEntry {
    OccupationTuple tuple;
    double relative_spread;  // (max - min) / total over the merged raw rows
};

struct CoincidenceLoad {
    CountsTable table;
    std::vector<AsymmetryEntry> asymmetry;
};

}  // namespace clicklab
