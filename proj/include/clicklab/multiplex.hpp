// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "clicklab/binomial.hpp"
#include "clicklab/detector_response.hpp"
#include "clicklab/errors.hpp"
#include "clicklab/photon_states.hpp"
#include "clicklab/rng.hpp"

namespace clicklab {

/// Balanced multiplexing layout: N identical detectors behind a lossless
/// balanced N-way split. Unbalanced networks are rejected; network loss is
/// folded into the detector efficiency.
struct MultiplexConfig {
    int detectors;    // N
    int max_outcome;  // K

    int N() const { return detectors; }
    int K() const { return max_outcome; }
};

inline constexpr std::size_t default_support_cap = 1000000;

/// Occupation (N_0, ..., N_K): how many detectors reported each outcome.
/// Entries sum to the detector count N.
using OccupationTuple = std::vector<int>;

/// Tuples are ordered with higher leading occupations first, so the all-zero
/// outcome (N, 0, ..., 0) comes first.
using TupleOrder = std::greater<OccupationTuple>;

/// Exact click-counting statistics: probability per occupation tuple.
struct ClickDistribution {
    MultiplexConfig config;
    std::map<OccupationTuple, double, TupleOrder> probs;
};

/// Observed integer counts per occupation tuple.
struct CountsTable {
    MultiplexConfig config;
    std::map<OccupationTuple, std::uint64_t, TupleOrder> counts;
    std::uint64_t shots = 0;
};

/// Joint counts of (heralding outcome, click tuple) from a PDC cascade run.
struct HeraldedCounts {
    MultiplexConfig config;
    std::map<int, CountsTable> by_herald;
    std::uint64_t shots = 0;
};

inline void validate(const MultiplexConfig& config) {
    if (config.detectors < 1) throw ValidationError("config.N: must be >= 1");
    if (config.max_outcome < 0) throw ValidationError("config.K: must be >= 0");
}

namespace detail {

inline double support_size(const MultiplexConfig& config) {
    // C(N + K, K), evaluated multiplicatively
    double size = 1.0;
    for (int i = 1; i <= config.max_outcome; ++i)
        size *= static_cast<double>(config.detectors + i) / i;
    return size;
}

inline void check_support_cap(const MultiplexConfig& config, std::size_t cap) {
    if (support_size(config) > static_cast<double>(cap) * (1.0 + 1e-9))
        throw SizeError("occupation support C(N+K,K) exceeds cap " + std::to_string(cap));
}

}  // namespace detail

/// All occupation tuples of the layout, higher leading occupations first;
/// exactly C(N+K, K) of them.
inline std::vector<OccupationTuple> enumerate_occupations(const MultiplexConfig& config,
                                                          std::size_t cap = default_support_cap) {
    validate(config);
    detail::check_support_cap(config, cap);
    std::vector<OccupationTuple> out;
    OccupationTuple current(static_cast<std::size_t>(config.max_outcome) + 1, 0);
    // recursive composition enumeration, largest N_k first at each position
    std::function<void(int, int)> emit = [&](int k, int remaining) {
        if (k == config.max_outcome) {
            current[static_cast<std::size_t>(k)] = remaining;
            out.push_back(current);
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            current[static_cast<std::size_t>(k)] = n;
            emit(k + 1, remaining - n);
        }
        current[static_cast<std::size_t>(k)] = 0;
    };
    emit(0, config.detectors);
    return out;
}

/// Groups individual detector outcomes (k_1, ..., k_N) into the occupation
/// tuple; invariant under permutations of the detectors.
inline OccupationTuple occupation_of_outcomes(const std::vector<int>& outcomes,
                                              const MultiplexConfig& config) {
    validate(config);
    if (static_cast<int>(outcomes.size()) != config.detectors)
        throw ValidationError("outcomes: expected " + std::to_string(config.detectors) + " entries");
    OccupationTuple tuple(static_cast<std::size_t>(config.max_outcome) + 1, 0);
    for (int k : outcomes) {
        if (k < 0 || k > config.max_outcome)
            throw ValidationError("outcomes: value " + std::to_string(k) + " outside [0, K]");
        ++tuple[static_cast<std::size_t>(k)];
    }
    return tuple;
}

inline void check_layout(const ResponseMatrix& resp, const MultiplexConfig& config) {
    validate(config);
    if (resp.split_count() != config.detectors)
        throw ValidationError("detector.N: response built for N=" + std::to_string(resp.split_count()) +
                              " but layout has N=" + std::to_string(config.detectors));
}

/// Click statistics of a classical mixture: the mixture average of exact
/// multinomial distributions over the single-detector outcome probabilities
/// p_k(w). A point mixture therefore gives an exact multinomial.
inline ClickDistribution click_distribution_classical(const ClassicalMixture& mixture,
                                                      const ResponseMatrix& resp,
                                                      const MultiplexConfig& config,
                                                      std::size_t cap = default_support_cap) {
    validate(mixture);
    check_layout(resp, config);
    const auto tuples = enumerate_occupations(config, cap);
    const int K = config.max_outcome;
    const int N = config.detectors;
    BinomialTable binom(N);

    std::vector<KahanSum> acc(tuples.size());
    for (const auto& comp : mixture.components) {
        const std::vector<double> p = coherent_outcome_probs(resp, comp.intensity);
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            double v = comp.weight;
            int remaining = N;
            for (int k = 0; k <= K; ++k) {
                int occ = tuples[t][static_cast<std::size_t>(k)];
                v *= binom(remaining, occ) * pow_int(p[static_cast<std::size_t>(k)], occ);
                remaining -= occ;
            }
            acc[t].add(v);
        }
    }

    ClickDistribution dist{config, {}};
    for (std::size_t t = 0; t < tuples.size(); ++t) dist.probs.emplace(tuples[t], acc[t].value());
    return dist;
}

namespace detail {

/// Scaled polynomial coefficients used by the exact engine.
///
/// For outcome k define the exponential generating function
///   T_k(x) = sum_m kernel(k, m) x^m / m!.
/// The probability of the tuple (N_0..N_K) given n input photons routed
/// uniformly over N detectors is
///   N!/(prod N_k!) * n! N^-n [x^n] prod_k T_k(x)^{N_k}.
/// We carry coefficients in the scaled form f_s[m] = m! N^-m f[m], for which
/// products become binomial-weighted convolutions and every intermediate
/// value stays in [0, 1].
struct ScaledPoly {
    std::vector<double> c;
};

inline ScaledPoly scaled_base(const ResponseMatrix& resp, int k, int n_max, int N) {
    ScaledPoly p;
    p.c.resize(static_cast<std::size_t>(n_max) + 1);
    double scale = 1.0;
    for (int m = 0; m <= n_max; ++m) {
        p.c[static_cast<std::size_t>(m)] = resp.kernel(k, m) * scale;
        scale /= N;
    }
    return p;
}

inline ScaledPoly scaled_multiply(const ScaledPoly& a, const ScaledPoly& b, int n_max,
                                  const BinomialTable& binom) {
    ScaledPoly out;
    out.c.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        KahanSum s;
        for (int m = 0; m <= n; ++m)
            s.add(binom(n, m) * a.c[static_cast<std::size_t>(m)] * b.c[static_cast<std::size_t>(n) - static_cast<std::size_t>(m)]);
        out.c[static_cast<std::size_t>(n)] = s.value();
    }
    return out;
}

}  // namespace detail

/// Exact click statistics for an arbitrary photon-number distribution.
///
/// Model: the lossless balanced network routes each photon independently to
/// one of the N outputs with probability 1/N (interference terms vanish for
/// photon-number-diagonal POVMs), and each detector applies its at-detector
/// kernel to the photons it received. Evaluated by dynamic programming over
/// the detectors with per-outcome exponential generating functions.
inline ClickDistribution click_distribution_fock_exact(const PhotonDistribution& dist,
                                                       const ResponseMatrix& resp,
                                                       const MultiplexConfig& config,
                                                       std::size_t cap = default_support_cap) {
    check_layout(resp, config);
    detail::check_support_cap(config, cap);
    if (resp.n_max() < dist.n_max())
        throw TruncationError("response n_max " + std::to_string(resp.n_max()) +
                              " smaller than state n_max " + std::to_string(dist.n_max()));
    const int n_max = dist.n_max();
    const int N = config.detectors;
    const int K = config.max_outcome;
    BinomialTable binom(std::max(n_max, N));

    std::vector<detail::ScaledPoly> base(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) base[static_cast<std::size_t>(k)] = detail::scaled_base(resp, k, n_max, N);

    ClickDistribution out{config, {}};
    OccupationTuple tuple(static_cast<std::size_t>(K) + 1, 0);

    // DFS over occupations; the stack carries the running polynomial product
    // and the multinomial weight N! / prod N_k!.
    std::function<void(int, int, const detail::ScaledPoly&, double)> walk =
        [&](int k, int remaining, const detail::ScaledPoly& prod, double multinom) {
            if (k == K) {
                // all remaining detectors take outcome K; C(remaining, remaining) = 1
                tuple[static_cast<std::size_t>(k)] = remaining;
                detail::ScaledPoly acc = prod;
                for (int i = 0; i < remaining; ++i)
                    acc = detail::scaled_multiply(acc, base[static_cast<std::size_t>(k)], n_max, binom);
                KahanSum total;
                for (int n = 0; n <= n_max; ++n)
                    total.add(dist.probs[static_cast<std::size_t>(n)] * acc.c[static_cast<std::size_t>(n)]);
                out.probs.emplace(tuple, multinom * total.value());
                tuple[static_cast<std::size_t>(k)] = 0;
                return;
            }
            detail::ScaledPoly acc = prod;
            double choose = multinom;  // accumulates C(remaining, occ) into N!/prod N_j!
            for (int occ = 0; occ <= remaining; ++occ) {
                tuple[static_cast<std::size_t>(k)] = occ;
                walk(k + 1, remaining - occ, acc, choose);
                if (occ < remaining) {
                    acc = detail::scaled_multiply(acc, base[static_cast<std::size_t>(k)], n_max, binom);
                    choose = choose * static_cast<double>(remaining - occ) / (occ + 1);
                }
            }
            tuple[static_cast<std::size_t>(k)] = 0;
        };

    detail::ScaledPoly one;
    one.c.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    one.c[0] = 1.0;
    walk(0, N, one, 1.0);
    return out;
}

namespace detail {

struct SamplerTables {
    DiscreteSampler photon_draw;
    std::vector<DiscreteSampler> outcome_draw;  // per photon count at a detector

    SamplerTables(const PhotonDistribution& dist, const ResponseMatrix& resp)
        : photon_draw(dist.probs) {
        outcome_draw.reserve(static_cast<std::size_t>(dist.n_max()) + 1);
        for (int m = 0; m <= dist.n_max(); ++m) {
            std::vector<double> col(static_cast<std::size_t>(resp.max_outcome()) + 1);
            for (int k = 0; k <= resp.max_outcome(); ++k)
                col[static_cast<std::size_t>(k)] = resp.kernel(k, m);
            outcome_draw.emplace_back(col);
        }
    }
};

inline void sample_into(CountsTable& table, const SamplerTables& tables,
                        const MultiplexConfig& config, std::uint64_t shots, Rng& rng) {
    const int N = config.detectors;
    std::vector<int> at_detector(static_cast<std::size_t>(N));
    std::vector<int> outcomes(static_cast<std::size_t>(N));
    OccupationTuple tuple(static_cast<std::size_t>(config.max_outcome) + 1);
    for (std::uint64_t s = 0; s < shots; ++s) {
        int n = static_cast<int>(tables.photon_draw(rng));
        std::fill(at_detector.begin(), at_detector.end(), 0);
        for (int i = 0; i < n; ++i) ++at_detector[rng.uniform_below(static_cast<std::uint64_t>(N))];
        std::fill(tuple.begin(), tuple.end(), 0);
        for (int d = 0; d < N; ++d) {
            int k = static_cast<int>(tables.outcome_draw[static_cast<std::size_t>(at_detector[static_cast<std::size_t>(d)])](rng));
            ++tuple[static_cast<std::size_t>(k)];
        }
        ++table.counts[tuple];
    }
    table.shots += shots;
}

inline std::vector<std::uint64_t> shard_shares(std::uint64_t shots, int shards) {
    std::vector<std::uint64_t> share(static_cast<std::size_t>(shards), shots / static_cast<std::uint64_t>(shards));
    for (std::uint64_t i = 0; i < shots % static_cast<std::uint64_t>(shards); ++i) ++share[static_cast<std::size_t>(i)];
    return share;
}

}  // namespace detail

/// Monte Carlo realization of the exact model: per shot, draw the photon
/// number, route each photon uniformly over the N detectors, and draw each
/// detector outcome from the at-detector kernel. Bit-identical results for a
/// fixed (seed, shards) pair; shards run on independent derived streams and
/// merge by summing counts.
inline CountsTable sample_clicks(const PhotonDistribution& dist, const ResponseMatrix& resp,
                                 const MultiplexConfig& config, std::uint64_t shots,
                                 std::uint64_t seed, int shards = 1) {
    check_layout(resp, config);
    if (shots < 1) throw ValidationError("shots: must be >= 1");
    if (shards < 1) throw ValidationError("shards: must be >= 1");
    if (resp.n_max() < dist.n_max())
        throw TruncationError("response n_max smaller than state n_max");

    detail::SamplerTables tables(dist, resp);
    auto share = detail::shard_shares(shots, shards);

    std::vector<CountsTable> partial(static_cast<std::size_t>(shards));
    auto run_shard = [&](int s) {
        partial[static_cast<std::size_t>(s)].config = config;
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
        detail::sample_into(partial[static_cast<std::size_t>(s)], tables, config, share[static_cast<std::size_t>(s)], rng);
    };
    if (shards == 1) {
        run_shard(0);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(shards));
        for (int s = 0; s < shards; ++s) workers.emplace_back(run_shard, s);
        for (auto& w : workers) w.join();
    }

    CountsTable merged{config, {}, 0};
    for (auto& p : partial) {
        merged.shots += p.shots;
        for (auto& [tuple, c] : p.counts) merged.counts[tuple] += c;
    }
    return merged;
}

/// Joint PDC cascade sampler. Per shot: draw the pair number n from the
/// (truncated) geometric TMSV statistics, thin it with the heralding
/// efficiency to get the herald outcome, then route the n signal photons
/// through the multiplexer as in sample_clicks. Feeds the empirical
/// generation-efficiency analysis.
inline HeraldedCounts sample_pdc_clicks(const TmsvParams& params, const ResponseMatrix& resp,
                                        const MultiplexConfig& config, std::uint64_t shots,
                                        std::uint64_t seed, int shards = 1,
                                        double tail_tol = 1e-12) {
    validate(params);
    check_layout(resp, config);
    if (shots < 1) throw ValidationError("shots: must be >= 1");
    if (shards < 1) throw ValidationError("shards: must be >= 1");

    const double nbar = params.q_sq / (1.0 - params.q_sq);
    PhotonDistribution pairs = thermal_distribution(nbar, -1, tail_tol);
    if (resp.n_max() < pairs.n_max())
        throw TruncationError("response n_max " + std::to_string(resp.n_max()) +
                              " smaller than PDC pair cutoff " + std::to_string(pairs.n_max()));

    detail::SamplerTables tables(pairs, resp);
    auto share = detail::shard_shares(shots, shards);

    std::vector<HeraldedCounts> partial(static_cast<std::size_t>(shards));
    auto run_shard = [&](int s) {
        auto& local = partial[static_cast<std::size_t>(s)];
        local.config = config;
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
        const int N = config.detectors;
        std::vector<int> at_detector(static_cast<std::size_t>(N));
        OccupationTuple tuple(static_cast<std::size_t>(config.max_outcome) + 1);
        for (std::uint64_t i = 0; i < share[static_cast<std::size_t>(s)]; ++i) {
            int n = static_cast<int>(tables.photon_draw(rng));
            int herald = 0;
            for (int j = 0; j < n; ++j)
                if (rng.uniform() < params.herald_eff) ++herald;
            std::fill(at_detector.begin(), at_detector.end(), 0);
            for (int j = 0; j < n; ++j) ++at_detector[rng.uniform_below(static_cast<std::uint64_t>(N))];
            std::fill(tuple.begin(), tuple.end(), 0);
            for (int d = 0; d < N; ++d) {
                int k = static_cast<int>(tables.outcome_draw[static_cast<std::size_t>(at_detector[static_cast<std::size_t>(d)])](rng));
                ++tuple[static_cast<std::size_t>(k)];
            }
            auto& slot = local.by_herald[herald];
            slot.config = config;
            ++slot.counts[tuple];
            ++slot.shots;
            ++local.shots;
        }
    };
    if (shards == 1) {
        run_shard(0);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(shards));
        for (int s = 0; s < shards; ++s) workers.emplace_back(run_shard, s);
        for (auto& w : workers) w.join();
    }

    HeraldedCounts merged;
    merged.config = config;
    for (auto& p : partial) {
        merged.shots += p.shots;
        for (auto& [l, table] : p.by_herald) {
            auto& slot = merged.by_herald[l];
            slot.config = config;
            slot.shots += table.shots;
            for (auto& [tuple, c] : table.counts) slot.counts[tuple] += c;
        }
    }
    return merged;
}

/// Empirical generation efficiency of the l-th heralded state: the share of
/// shots whose herald reported l.
inline double eta_gen_empirical(const HeraldedCounts& counts, int herald) {
    if (counts.shots == 0) throw DegenerateStatisticsError("eta_gen: empty data");
    auto it = counts.by_herald.find(herald);
    std::uint64_t c = it == counts.by_herald.end() ? 0 : it->second.shots;
    return static_cast<double>(c) / static_cast<double>(counts.shots);
}

}  // namespace clicklab
