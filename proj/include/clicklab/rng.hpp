// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "clicklab/errors.hpp"

namespace clicklab {

/// splitmix64 step; also used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// xoshiro256** generator (Blackman & Vigna), seeded through splitmix64.
///
/// All sampling in clicklab goes through this class with hand-rolled
/// uniform/discrete draws, so streams are bit-identical across platforms and
/// standard libraries. Derived streams (shards, bootstrap resamples) use
/// `derive_seed`.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    /// Seed for an independent derived stream (shard or resample index).
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (0x6a09e667f3bcc909ull + stream * 0x9e3779b97f4a7c15ull);
        return splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, n). Lemire's multiply-shift rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw ValidationError("uniform_below: n must be positive");
        while (true) {
            std::uint64_t x = next_u64();
            unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
            std::uint64_t lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= static_cast<std::uint64_t>(-n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

/// Inverse-CDF sampler over a fixed finite distribution (renormalized).
class DiscreteSampler {
  public:
    explicit DiscreteSampler(const std::vector<double>& weights) : cdf_(weights) {
        double total = 0;
        for (double w : weights) {
            if (w < 0) throw ValidationError("DiscreteSampler: negative weight");
            total += w;
        }
        if (total <= 0) throw ValidationError("DiscreteSampler: zero total weight");
        double acc = 0;
        for (std::size_t i = 0; i < cdf_.size(); ++i) {
            acc += cdf_[i] / total;
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;  // close the last bin against rounding
    }

    std::size_t operator()(Rng& rng) const {
        double u = rng.uniform();
        // binary search for the first cdf entry > u
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cdf_[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

  private:
    std::vector<double> cdf_;
};

/// Walker alias table; O(1) draws, used for high-volume resampling.
class AliasSampler {
  public:
    explicit AliasSampler(const std::vector<double>& weights)
        : prob_(weights.size()), alias_(weights.size()) {
        const std::size_t n = weights.size();
        if (n == 0) throw ValidationError("AliasSampler: empty weights");
        double total = 0;
        for (double w : weights) {
            if (w < 0) throw ValidationError("AliasSampler: negative weight");
            total += w;
        }
        if (total <= 0) throw ValidationError("AliasSampler: zero total weight");
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] / total * static_cast<double>(n);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            std::size_t s = small.back(), g = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = g;
            scaled[g] = (scaled[g] + scaled[s]) - 1.0;
            if (scaled[g] < 1.0) {
                large.pop_back();
                small.push_back(g);
            }
        }
        for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
        for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
    }

    std::size_t operator()(Rng& rng) const {
        std::size_t i = static_cast<std::size_t>(rng.uniform_below(prob_.size()));
        return rng.uniform() < prob_[i] ? i : alias_[i];
    }

  private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

}  // namespace clicklab
