// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "clicklab/jacobi.hpp"
#include "clicklab/moments.hpp"
#include "clicklab/multiplex.hpp"
#include "clicklab/rng.hpp"

namespace clicklab {

enum class WitnessLabel { multinomial_eigvec, binomial, poisson, custom };

inline std::string to_string(WitnessLabel label) {
    switch (label) {
        case WitnessLabel::multinomial_eigvec: return "multinomial-eigvec";
        case WitnessLabel::binomial: return "binomial";
        case WitnessLabel::poisson: return "poisson";
        default: return "custom";
    }
}

/// Coefficients f of the projected observable mu = sum_k f_k pi_k.
struct WitnessVector {
    std::vector<double> f;
    WitnessLabel label = WitnessLabel::custom;
};

/// f = (0, 1, ..., 1): reduces the layout to click / no-click.
inline WitnessVector binomial_vector(int K) {
    WitnessVector w;
    w.label = WitnessLabel::binomial;
    w.f.assign(static_cast<std::size_t>(K) + 1, 1.0);
    w.f[0] = 0.0;
    return w;
}

/// f = (0, 1, 2, ..., K): outcome-weighted counting.
inline WitnessVector poisson_vector(int K) {
    WitnessVector w;
    w.label = WitnessLabel::poisson;
    w.f.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) w.f[static_cast<std::size_t>(k)] = k;
    return w;
}

enum class Verdict { nonclassical, consistent_with_classical };

inline std::string to_string(Verdict v) {
    return v == Verdict::nonclassical ? "nonclassical" : "consistent-with-classical";
}

/// Decision policy: nonclassical iff value + z * std_error < -zero_tol.
/// The absolute floor absorbs floating-point and truncation noise so exact
/// classical data (value ~ -1e-12 instead of 0) is not misclassified; it is
/// negligible against any realistic bootstrap error.
struct VerdictPolicy {
    double z = 3.0;
    double zero_tol = 1e-10;
};

struct CriterionResult {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    WitnessVector vector;
    Verdict verdict = Verdict::consistent_with_classical;
    bool degenerate_flagged = false;          // > 10% degenerate bootstrap resamples
    std::map<std::string, double> components;  // e.g. raw and corrected Mandel parameters

    double significance() const {
        if (std_error == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() * (value < 0 ? -1 : 1);
        return value / std_error;
    }
};

inline Verdict decide(double value, double std_error, const VerdictPolicy& policy) {
    return value + policy.z * std_error < -policy.zero_tol ? Verdict::nonclassical
                                                           : Verdict::consistent_with_classical;
}

/// Attaches a bootstrap uncertainty to a computed criterion and re-evaluates
/// the verdict under the policy.
inline void apply_uncertainty(CriterionResult& r, double std_error, const VerdictPolicy& policy = {}) {
    r.std_error = std_error;
    r.verdict = decide(r.value, std_error, policy);
}

/// Quadratic form f^T M2 f.
inline double projected_criterion(const MomentMatrix2& m2, const WitnessVector& f) {
    const std::size_t dim = static_cast<std::size_t>(m2.K) + 1;
    if (f.f.size() != dim) throw ValidationError("witness: expected " + std::to_string(dim) + " components");
    KahanSum s;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) s.add(f.f[i] * m2.entries[i * dim + j] * f.f[j]);
    return s.value();
}

/// Sub-multinomial criterion: the minimal eigenvalue of M2 with its witness
/// eigenvector. Zero for every classical state, negative for sub-multinomial
/// light.
inline CriterionResult q_multi(const MomentMatrix2& m2, const VerdictPolicy& policy = {}) {
    MinEig eig = min_eig_sym(m2.entries, m2.K + 1);
    CriterionResult r;
    r.name = "multi";
    r.value = eig.value;
    r.vector.f = eig.vector;
    r.vector.label = WitnessLabel::multinomial_eigvec;
    r.degenerate_flagged = false;
    r.components["eigen_degenerate"] = eig.degenerate ? 1.0 : 0.0;
    r.verdict = decide(r.value, 0.0, policy);
    return r;
}

namespace detail {

struct MeanVar {
    double mean;
    double var;  // population variance
};

/// Mean and population variance of a scalar statistic of the tuple.
template <class Data>
MeanVar scalar_stats(const Data& data, const std::function<double(const OccupationTuple&)>& stat) {
    KahanSum m1, m2;
    for_each_event(data, [&](const OccupationTuple& t, double w) {
        double x = stat(t);
        m1.add(w * x);
        m2.add(w * x * x);
    });
    double mean = m1.value();
    return {mean, m2.value() - mean * mean};
}

}  // namespace detail

/// Sub-binomial criterion on the click/no-click reduction B = N - N_0:
/// Q_bin = N Var(B) / (mean(B) (N - mean(B))) - 1. Degenerate when every
/// event is all-vacuum or no-vacuum.
template <class Data>
CriterionResult q_bin(const Data& data, const VerdictPolicy& policy = {}) {
    const int N = data.config.detectors;
    if (N < 2) throw ValidationError("config.N: Q_bin requires N >= 2");
    auto stats = detail::scalar_stats(data, [N](const OccupationTuple& t) {
        return static_cast<double>(N - t[0]);
    });
    if (stats.mean <= 0.0 || stats.mean >= static_cast<double>(N))
        throw DegenerateStatisticsError("Q_bin: mean click number " + std::to_string(stats.mean) +
                                        " gives a degenerate denominator");
    CriterionResult r;
    r.name = "bin";
    r.value = N * stats.var / (stats.mean * (N - stats.mean)) - 1.0;
    r.vector = binomial_vector(data.config.max_outcome);
    r.verdict = decide(r.value, 0.0, policy);
    return r;
}

/// Corrected sub-Poisson criterion on A = sum_k k N_k. The headline value is
/// the corrected form (Q_Pois - Q'_Pois) / (N - 1) = <:(Delta mu)^2:>/<:mu:>
/// for f = (0, 1, ..., K); the raw Mandel parameters are reported as
/// components. For photoelectric responses Q_Pois = N Q'_Pois.
template <class Data>
CriterionResult q_pois(const Data& data, const VerdictPolicy& policy = {}) {
    const int N = data.config.detectors;
    const int K = data.config.max_outcome;
    if (N < 2) throw ValidationError("config.N: Q_pois requires N >= 2");

    auto a_stats = detail::scalar_stats(data, [K](const OccupationTuple& t) {
        double a = 0;
        for (int k = 1; k <= K; ++k) a += static_cast<double>(k) * t[static_cast<std::size_t>(k)];
        return a;
    });
    if (a_stats.mean <= 0.0)
        throw DegenerateStatisticsError("Q_pois: mean weighted click number is zero");

    // outcome-level moments of the probabilities mean(N_k)/N
    KahanSum first, second;
    detail::for_each_event(data, [&](const OccupationTuple& t, double w) {
        for (int k = 1; k <= K; ++k) {
            double p = w * t[static_cast<std::size_t>(k)] / N;
            first.add(k * p);
            second.add(static_cast<double>(k) * k * p);
        }
    });
    const double mu = first.value();
    const double q_raw = a_stats.var / a_stats.mean - 1.0;
    const double q_prime = (second.value() - mu * mu) / mu - 1.0;

    CriterionResult r;
    r.name = "pois";
    r.value = (q_raw - q_prime) / (N - 1);
    r.components["q_pois"] = q_raw;
    r.components["q_pois_prime"] = q_prime;
    r.vector = poisson_vector(K);
    r.verdict = decide(r.value, 0.0, policy);
    return r;
}

struct MuStats {
    double mean;
    double variance;  // normally ordered variance <:(Delta mu)^2:>
};

/// Mean and normally ordered variance of mu = sum_k f_k pi_k:
/// mean = sum_k f_k mean(N_k)/N, variance = f^T M2 f (raw scale).
template <class Data>
MuStats mu_statistics(const Data& data, const WitnessVector& f) {
    const int N = data.config.detectors;
    const std::size_t dim = static_cast<std::size_t>(data.config.max_outcome) + 1;
    if (f.f.size() != dim) throw ValidationError("witness: expected " + std::to_string(dim) + " components");
    KahanSum mean;
    detail::for_each_event(data, [&](const OccupationTuple& t, double w) {
        for (std::size_t k = 0; k < dim; ++k) mean.add(w * f.f[k] * t[k] / N);
    });
    MomentMatrix2 m2 = covariance_matrix(data, MomentScale::raw);
    return {mean.value(), projected_criterion(m2, f)};
}

/// Positivity test of the full higher-order moment matrix; reports its
/// minimal eigenvalue.
template <class Data>
CriterionResult full_matrix_test(const Data& data, const MultiplexConfig& config,
                                 const VerdictPolicy& policy = {}) {
    HigherMomentMatrix m = higher_moment_matrix(data, config);
    MinEig eig = min_eig_sym(m.entries, m.dim());
    CriterionResult r;
    r.name = "full";
    r.value = eig.value;
    r.vector.f = eig.vector;
    r.vector.label = WitnessLabel::custom;
    r.components["dim"] = m.dim();
    r.components["eigen_degenerate"] = eig.degenerate ? 1.0 : 0.0;
    r.verdict = decide(r.value, 0.0, policy);
    return r;
}

struct BootstrapResult {
    double std_error = 0.0;
    double degenerate_share = 0.0;
    bool flagged = false;  // more than 10% of resamples were degenerate
    int resamples_used = 0;
};

/// Multinomial bootstrap: resamples the counts table shot-by-shot (alias
/// sampling of the empirical distribution) and recomputes the criterion per
/// resample. Deterministic for a fixed seed; each resample runs on its own
/// derived stream. Throws if every resample is degenerate.
inline BootstrapResult bootstrap(const CountsTable& data,
                                 const std::function<double(const CountsTable&)>& criterion,
                                 int resamples, std::uint64_t seed) {
    if (data.shots < 1) throw ValidationError("bootstrap: counts table is empty");
    if (resamples < 100) throw ValidationError("bootstrap: need at least 100 resamples");

    std::vector<OccupationTuple> support;
    std::vector<double> weights;
    support.reserve(data.counts.size());
    for (const auto& [tuple, c] : data.counts) {
        support.push_back(tuple);
        weights.push_back(static_cast<double>(c));
    }
    AliasSampler alias(weights);

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(resamples));
    int degenerate = 0;
    CountsTable resampled{data.config, {}, 0};
    for (int b = 0; b < resamples; ++b) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(b)));
        resampled.counts.clear();
        resampled.shots = data.shots;
        for (std::uint64_t s = 0; s < data.shots; ++s) ++resampled.counts[support[alias(rng)]];
        try {
            values.push_back(criterion(resampled));
        } catch (const DegenerateStatisticsError&) {
            ++degenerate;
        }
    }

    BootstrapResult result;
    result.degenerate_share = static_cast<double>(degenerate) / resamples;
    result.flagged = result.degenerate_share > 0.1;
    result.resamples_used = static_cast<int>(values.size());
    if (values.empty())
        throw DegenerateStatisticsError("bootstrap: criterion degenerate on every resample");
    KahanSum m1;
    for (double v : values) m1.add(v);
    double mean = m1.value() / static_cast<double>(values.size());
    KahanSum ss;
    for (double v : values) ss.add((v - mean) * (v - mean));
    result.std_error = values.size() > 1 ? std::sqrt(ss.value() / (static_cast<double>(values.size()) - 1)) : 0.0;
    return result;
}

/// Shared-resample variant: evaluates several criteria on the same bootstrap
/// resamples (one alias pass per resample instead of one per criterion).
inline std::vector<BootstrapResult> bootstrap_many(
    const CountsTable& data, const std::vector<std::function<double(const CountsTable&)>>& criteria,
    int resamples, std::uint64_t seed) {
    if (data.shots < 1) throw ValidationError("bootstrap: counts table is empty");
    if (resamples < 100) throw ValidationError("bootstrap: need at least 100 resamples");

    std::vector<OccupationTuple> support;
    std::vector<double> weights;
    for (const auto& [tuple, c] : data.counts) {
        support.push_back(tuple);
        weights.push_back(static_cast<double>(c));
    }
    AliasSampler alias(weights);

    std::vector<std::vector<double>> values(criteria.size());
    std::vector<int> degenerate(criteria.size(), 0);
    CountsTable resampled{data.config, {}, 0};
    for (int b = 0; b < resamples; ++b) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(b)));
        resampled.counts.clear();
        resampled.shots = data.shots;
        for (std::uint64_t s = 0; s < data.shots; ++s) ++resampled.counts[support[alias(rng)]];
        for (std::size_t i = 0; i < criteria.size(); ++i) {
            try {
                values[i].push_back(criteria[i](resampled));
            } catch (const DegenerateStatisticsError&) {
                ++degenerate[i];
            }
        }
    }

    std::vector<BootstrapResult> out(criteria.size());
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        out[i].degenerate_share = static_cast<double>(degenerate[i]) / resamples;
        out[i].flagged = out[i].degenerate_share > 0.1;
        out[i].resamples_used = static_cast<int>(values[i].size());
        if (values[i].empty()) {
            out[i].std_error = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        KahanSum m1;
        for (double v : values[i]) m1.add(v);
        double mean = m1.value() / static_cast<double>(values[i].size());
        KahanSum ss;
        for (double v : values[i]) ss.add((v - mean) * (v - mean));
        out[i].std_error =
            values[i].size() > 1 ? std::sqrt(ss.value() / (static_cast<double>(values[i].size()) - 1)) : 0.0;
    }
    return out;
}

}  // namespace clicklab
