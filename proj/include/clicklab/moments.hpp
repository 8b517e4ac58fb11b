// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "clicklab/binomial.hpp"
#include "clicklab/errors.hpp"
#include "clicklab/multiplex.hpp"

namespace clicklab {

/// Multi-index (m_0, ..., m_K) addressing the normally ordered moment
/// <: pi_0^{m_0} ... pi_K^{m_K} :>.
using MultiIndex = std::vector<int>;

enum class MomentScale { raw, scaled };  // scaled = multiplied by N^2 (N-1)

/// Symmetric (K+1)x(K+1) matrix of normally ordered covariances
/// <: Delta pi_k Delta pi_k' :>. The all-ones vector is always in its kernel,
/// so the minimal eigenvalue of any exact classical matrix is zero.
struct MomentMatrix2 {
    int K = 0;
    MomentScale scale = MomentScale::raw;
    std::vector<double> entries;  // row-major, (K+1)^2

    double at(int k, int kp) const {
        return entries[static_cast<std::size_t>(k) * (static_cast<std::size_t>(K) + 1) +
                       static_cast<std::size_t>(kp)];
    }
};

/// Matrix of higher-order normally ordered moments: rows/columns are indexed
/// by multi-indices with |m| <= floor(N/2); the (m, m') entry is the moment
/// at m + m'.
struct HigherMomentMatrix {
    std::vector<MultiIndex> indices;
    std::vector<double> entries;  // row-major, indices.size()^2

    int dim() const { return static_cast<int>(indices.size()); }
    double at(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * indices.size() + static_cast<std::size_t>(j)];
    }
};

namespace detail {

/// Applies fn(tuple, weight) over the empirical (or exact) distribution.
/// Exact distributions are renormalized by their total mass so that the
/// structural moment identities (kernel vector, row sums) hold exactly even
/// for tail-truncated inputs.
inline void for_each_event(const ClickDistribution& d,
                           const std::function<void(const OccupationTuple&, double)>& fn) {
    KahanSum mass;
    for (const auto& [tuple, p] : d.probs) mass.add(p);
    if (mass.value() <= 0.0) throw DegenerateStatisticsError("click distribution has zero mass");
    const double inv = 1.0 / mass.value();
    for (const auto& [tuple, p] : d.probs) fn(tuple, p * inv);
}

inline void for_each_event(const CountsTable& d,
                           const std::function<void(const OccupationTuple&, double)>& fn) {
    if (d.shots == 0) throw DegenerateStatisticsError("counts table is empty");
    const double inv = 1.0 / static_cast<double>(d.shots);
    for (const auto& [tuple, c] : d.counts) fn(tuple, static_cast<double>(c) * inv);
}

template <class Data>
void check_multi_index(const Data& data, const MultiIndex& m) {
    if (static_cast<int>(m.size()) != data.config.max_outcome + 1)
        throw ValidationError("multi-index: expected " + std::to_string(data.config.max_outcome + 1) +
                              " components");
    int total = 0;
    for (int v : m) {
        if (v < 0) throw ValidationError("multi-index: components must be >= 0");
        total += v;
    }
    if (total > data.config.detectors)
        throw ValidationError("multi-index: total order " + std::to_string(total) +
                              " exceeds detector count N = " + std::to_string(data.config.detectors));
}

}  // namespace detail

/// Sample mean of the product of falling factorials prod_k (N_k)_{m_k};
/// requires |m| <= N.
template <class Data>
double factorial_moment(const Data& data, const MultiIndex& m) {
    detail::check_multi_index(data, m);
    KahanSum s;
    detail::for_each_event(data, [&](const OccupationTuple& tuple, double w) {
        double prod = w;
        for (std::size_t k = 0; k < m.size(); ++k)
            prod *= falling_factorial(static_cast<double>(tuple[k]), m[k]);
        s.add(prod);
    });
    return s.value();
}

/// Normally ordered moment <: pi_0^{m_0} ... pi_K^{m_K} :>; the factorial
/// moment divided by (N)_{|m|}.
template <class Data>
double normal_moment(const Data& data, const MultiIndex& m) {
    detail::check_multi_index(data, m);
    int total = std::accumulate(m.begin(), m.end(), 0);
    return factorial_moment(data, m) / falling_factorial(static_cast<double>(data.config.detectors), total);
}

/// All factorial moments with total order <= max_total; the zero multi-index
/// maps to 1.
template <class Data>
std::map<MultiIndex, double> factorial_moment_table(const Data& data, int max_total) {
    std::map<MultiIndex, double> table;
    const int K = data.config.max_outcome;
    MultiIndex m(static_cast<std::size_t>(K) + 1, 0);
    std::function<void(int, int)> walk = [&](int k, int budget) {
        if (k == K + 1) {
            table.emplace(m, factorial_moment(data, m));
            return;
        }
        for (int v = 0; v <= budget; ++v) {
            m[static_cast<std::size_t>(k)] = v;
            walk(k + 1, budget - v);
        }
        m[static_cast<std::size_t>(k)] = 0;
    };
    walk(0, max_total);
    return table;
}

/// Normally ordered covariance matrix M2 with entries
/// [N Cov(N_k, N_k') - mean(N_k) (N delta - mean(N_k'))] / (N^2 (N-1)),
/// optionally scaled by N^2 (N-1). Estimated from aggregated occupations with
/// population covariances; no Bessel correction.
template <class Data>
MomentMatrix2 covariance_matrix(const Data& data, MomentScale scale = MomentScale::raw) {
    const int N = data.config.detectors;
    const int K = data.config.max_outcome;
    if (N < 2) throw ValidationError("config.N: covariance matrix requires N >= 2");
    const std::size_t dim = static_cast<std::size_t>(K) + 1;

    std::vector<KahanSum> mean(dim);
    std::vector<KahanSum> second(dim * dim);
    detail::for_each_event(data, [&](const OccupationTuple& tuple, double w) {
        for (std::size_t k = 0; k < dim; ++k) {
            mean[k].add(w * tuple[k]);
            for (std::size_t kp = 0; kp < dim; ++kp)
                second[k * dim + kp].add(w * tuple[k] * tuple[kp]);
        }
    });

    MomentMatrix2 m2;
    m2.K = K;
    m2.scale = scale;
    m2.entries.resize(dim * dim);
    const double denom = scale == MomentScale::raw ? static_cast<double>(N) * N * (N - 1) : 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t kp = 0; kp < dim; ++kp) {
            double cov = second[k * dim + kp].value() - mean[k].value() * mean[kp].value();
            double delta = k == kp ? 1.0 : 0.0;
            double val = N * cov - mean[k].value() * (N * delta - mean[kp].value());
            m2.entries[k * dim + kp] = val / denom;
        }
    }
    return m2;
}

/// Multi-indices over K+1 outcomes with total order <= max_total, grouped by
/// ascending total order, higher leading components first within a group.
inline std::vector<MultiIndex> multi_indices_up_to(int K, int max_total) {
    std::vector<MultiIndex> out;
    MultiIndex m(static_cast<std::size_t>(K) + 1, 0);
    for (int total = 0; total <= max_total; ++total) {
        std::function<void(int, int)> walk = [&](int k, int remaining) {
            if (k == K) {
                m[static_cast<std::size_t>(k)] = remaining;
                out.push_back(m);
                return;
            }
            for (int v = remaining; v >= 0; --v) {
                m[static_cast<std::size_t>(k)] = v;
                walk(k + 1, remaining - v);
            }
            m[static_cast<std::size_t>(k)] = 0;
        };
        walk(0, total);
    }
    return out;
}

/// Full matrix of normally ordered moments up to the order bound
/// |m| <= floor(N/2) imposed by the layout; positive semidefinite for every
/// classical state.
template <class Data>
HigherMomentMatrix higher_moment_matrix(const Data& data, const MultiplexConfig& config) {
    if (config.detectors < 2) throw ValidationError("config.N: moment matrix requires N >= 2");
    HigherMomentMatrix m;
    m.indices = multi_indices_up_to(config.max_outcome, config.detectors / 2);
    const std::size_t dim = m.indices.size();
    m.entries.resize(dim * dim);
    MultiIndex sum(static_cast<std::size_t>(config.max_outcome) + 1);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = m.indices[i][k] + m.indices[j][k];
            double v = normal_moment(data, sum);
            m.entries[i * dim + j] = v;
            m.entries[j * dim + i] = v;
        }
    }
    return m;
}

}  // namespace clicklab
