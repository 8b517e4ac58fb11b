// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, kept independent of the library paths they check.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "clicklab/multiplex.hpp"
#include "clicklab/rng.hpp"

namespace testsupport {

using clicklab::CountsTable;
using clicklab::MultiplexConfig;
using clicklab::OccupationTuple;
using clicklab::PhotonDistribution;
using clicklab::ResponseMatrix;

// -----------------------------------------------------------------------
// Brute-force click statistics: enumerate every photon split (n_1..n_N) and
// every outcome tuple (k_1..k_N) directly, then group occupations. Feasible
// for small N and n_max; the production engine must match it.

inline void enumerate_splits(int n, int N, std::vector<int>& split,
                             const std::function<void(const std::vector<int>&)>& fn) {
    if (N == 1) {
        split.push_back(n);
        fn(split);
        split.pop_back();
        return;
    }
    for (int first = 0; first <= n; ++first) {
        split.push_back(first);
        enumerate_splits(n - first, N - 1, split, fn);
        split.pop_back();
    }
}

inline double multinomial_weight(int n, const std::vector<int>& split, int N) {
    double w = 1.0;
    int used = 0;
    for (int part : split) {
        for (int i = 1; i <= part; ++i) {
            ++used;
            w *= static_cast<double>(used) / (static_cast<double>(i) * N);
        }
    }
    // w = n! / (prod n_i!) / N^used with used = n
    (void)n;
    return w;
}

inline clicklab::ClickDistribution brute_force_clicks(const PhotonDistribution& dist,
                                                      const ResponseMatrix& resp,
                                                      const MultiplexConfig& config) {
    clicklab::ClickDistribution out{config, {}};
    const int N = config.detectors;
    const int K = config.max_outcome;
    for (const auto& tuple : clicklab::enumerate_occupations(config)) out.probs.emplace(tuple, 0.0);

    std::vector<int> outcomes(static_cast<std::size_t>(N));
    for (int n = 0; n <= dist.n_max(); ++n) {
        double pn = dist.probs[static_cast<std::size_t>(n)];
        if (pn == 0.0) continue;
        std::vector<int> split;
        enumerate_splits(n, N, split, [&](const std::vector<int>& s) {
            double route = pn * multinomial_weight(n, s, N);
            // every outcome assignment (k_1..k_N)
            std::function<void(int, double)> assign = [&](int det, double w) {
                if (det == N) {
                    OccupationTuple tuple = clicklab::occupation_of_outcomes(outcomes, config);
                    out.probs[tuple] += w;
                    return;
                }
                for (int k = 0; k <= K; ++k) {
                    outcomes[static_cast<std::size_t>(det)] = k;
                    assign(det + 1, w * resp.kernel(k, s[static_cast<std::size_t>(det)]));
                }
            };
            assign(0, route);
        });
    }
    return out;
}

// -----------------------------------------------------------------------
// Chi-square goodness of fit. Regularized upper incomplete gamma Q(a, x)
// via series / continued fraction (Numerical Recipes style).

inline double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) return std::nan("");
    if (x == 0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // lower series
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction (modified Lentz)
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

/// p-value of a chi-square test of counts against exact probabilities.
/// Cells with expected counts below `min_expected` are pooled.
inline double chi2_pvalue(const CountsTable& counts, const clicklab::ClickDistribution& exact,
                          double min_expected = 5.0) {
    const double shots = static_cast<double>(counts.shots);
    double chi2 = 0.0;
    int cells = 0;
    double pooled_obs = 0.0, pooled_exp = 0.0;
    for (const auto& [tuple, p] : exact.probs) {
        double expected = p * shots;
        auto it = counts.counts.find(tuple);
        double observed = it == counts.counts.end() ? 0.0 : static_cast<double>(it->second);
        if (expected < min_expected) {
            pooled_obs += observed;
            pooled_exp += expected;
            continue;
        }
        chi2 += (observed - expected) * (observed - expected) / expected;
        ++cells;
    }
    if (pooled_exp > 0) {
        chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        ++cells;
    }
    int dof = cells - 1;
    if (dof < 1) return 1.0;
    return gamma_q(dof / 2.0, chi2 / 2.0);
}

inline double total_variation(const CountsTable& counts, const clicklab::ClickDistribution& exact) {
    const double shots = static_cast<double>(counts.shots);
    double tv = 0.0;
    std::map<OccupationTuple, double, clicklab::TupleOrder> seen;
    for (const auto& [tuple, p] : exact.probs) seen[tuple] = p;
    for (const auto& [tuple, c] : counts.counts) {
        double emp = static_cast<double>(c) / shots;
        auto it = seen.find(tuple);
        double p = it == seen.end() ? 0.0 : it->second;
        tv += std::abs(emp - p);
        if (it != seen.end()) seen.erase(it);
    }
    for (const auto& [tuple, p] : seen) tv += p;
    return tv / 2.0;
}

// -----------------------------------------------------------------------
// Random counts tables for fuzzing structural invariants.

inline CountsTable random_counts_table(clicklab::Rng& rng) {
    const int N = 2 + static_cast<int>(rng.uniform_below(4));  // 2..5
    const int K = 1 + static_cast<int>(rng.uniform_below(7));  // 1..7
    MultiplexConfig config{N, K};
    auto tuples = clicklab::enumerate_occupations(config);
    CountsTable table{config, {}, 0};
    const int support = 1 + static_cast<int>(rng.uniform_below(tuples.size()));
    for (int i = 0; i < support; ++i) {
        const auto& tuple = tuples[rng.uniform_below(tuples.size())];
        std::uint64_t c = 1 + rng.uniform_below(10000);
        table.counts[tuple] += c;
        table.shots += c;
    }
    return table;
}

}  // namespace testsupport
