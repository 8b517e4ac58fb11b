// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "clicklab/binomial.hpp"
#include "clicklab/errors.hpp"
#include "clicklab/photon_states.hpp"

namespace clicklab {

enum class ResponseFamily { photoelectric, on_off, custom };

inline std::string to_string(ResponseFamily f) {
    switch (f) {
        case ResponseFamily::photoelectric: return "photoelectric";
        case ResponseFamily::on_off: return "on_off";
        default: return "custom";
    }
}

/// Outcome statistics of one detector of a balanced N-way multiplexing
/// layout, restricted to photon-number-diagonal POVMs.
///
/// Two equivalent views are exposed:
///  - prob(k, n): probability that the detector reports k when the *input*
///    mode carries n photons, i.e. the diagonal of the POVM lifted through
///    the balanced split (effective per-detector efficiency y = eta / N).
///  - kernel(k, m): probability that the detector reports k when m photons
///    arrive *at the detector itself*. The exact engine and the sampler route
///    photons first and then apply this kernel.
///
/// For the parametric families both views are closed-form binomial
/// statistics; custom matrices supply the kernel and the lifted view follows
/// by binomial thinning with ratio 1/N. Outcomes >= K are aggregated into the
/// top bin K, which keeps the POVM complete at finite resolution.
class ResponseMatrix {
  public:
    int max_outcome() const { return K_; }
    int n_max() const { return n_max_; }
    int split_count() const { return N_; }
    ResponseFamily family() const { return family_; }
    double eta() const { return eta_; }
    /// Effective per-detector efficiency y = eta / N (parametric families).
    double y() const { return eta_ / N_; }

    double prob(int k, int n) const { return lifted_[idx(k, n)]; }
    double kernel(int k, int m) const { return kernel_[idx(k, m)]; }

    /// Outcome distribution for n input photons.
    std::vector<double> prob_column(int n) const {
        std::vector<double> col(static_cast<std::size_t>(K_) + 1);
        for (int k = 0; k <= K_; ++k) col[static_cast<std::size_t>(k)] = prob(k, n);
        return col;
    }

    static ResponseMatrix photoelectric(double eta, int N, int K, int n_max);
    static ResponseMatrix on_off(double eta, int N, int n_max);
    static ResponseMatrix custom(std::vector<std::vector<double>> kernel_rows, int N);

  private:
    ResponseMatrix() = default;
    std::size_t idx(int k, int n) const {
        return static_cast<std::size_t>(k) * (static_cast<std::size_t>(n_max_) + 1) +
               static_cast<std::size_t>(n);
    }
    void check_completeness(const std::vector<double>& m, double tol, const char* what) const;

    int K_ = 0;
    int n_max_ = 0;
    int N_ = 1;
    ResponseFamily family_ = ResponseFamily::custom;
    double eta_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> lifted_;
    std::vector<double> kernel_;
};

namespace detail {

/// Binomial outcome matrix with success probability p and top-bin
/// aggregation at K; the top bin is completed to exactly 1 - sum of the rest.
inline std::vector<double> binned_binomial_matrix(double p, int K, int n_max,
                                                  const BinomialTable& binom) {
    std::vector<double> m(static_cast<std::size_t>(K + 1) * (static_cast<std::size_t>(n_max) + 1), 0.0);
    auto at = [&](int k, int n) -> double& {
        return m[static_cast<std::size_t>(k) * (static_cast<std::size_t>(n_max) + 1) +
                 static_cast<std::size_t>(n)];
    };
    for (int n = 0; n <= n_max; ++n) {
        KahanSum below;
        for (int k = 0; k < K; ++k) {
            double v = k <= n ? binom(n, k) * pow_int(p, k) * pow_int(1.0 - p, n - k) : 0.0;
            at(k, n) = v;
            below.add(v);
        }
        at(K, n) = std::max(0.0, 1.0 - below.value());
    }
    return m;
}

}  // namespace detail

inline void ResponseMatrix::check_completeness(const std::vector<double>& m, double tol,
                                               const char* what) const {
    for (int n = 0; n <= n_max_; ++n) {
        KahanSum col;
        for (int k = 0; k <= K_; ++k) {
            double v = m[idx(k, n)];
            if (v < 0.0 || v > 1.0)
                throw ValidationError(std::string(what) + ": entry (k=" + std::to_string(k) +
                                      ", n=" + std::to_string(n) + ") outside [0,1]");
            col.add(v);
        }
        if (std::abs(col.value() - 1.0) > tol)
            throw ValidationError(std::string(what) + ": column n=" + std::to_string(n) +
                                  " sums to " + std::to_string(col.value()) + ", violating completeness");
    }
}

/// Linear (photoelectric) detector: binomial statistics with per-detector
/// success eta at the detector and eta/N after the split, K+1 outcomes.
inline ResponseMatrix ResponseMatrix::photoelectric(double eta, int N, int K, int n_max) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("detector.eta: must lie in [0,1]");
    if (N < 1) throw ValidationError("detector.N: must be >= 1");
    if (K < 1) throw ValidationError("detector.K: must be >= 1");
    if (n_max < 0) throw ValidationError("detector.n_max: must be >= 0");
    ResponseMatrix r;
    r.K_ = K;
    r.n_max_ = n_max;
    r.N_ = N;
    r.family_ = ResponseFamily::photoelectric;
    r.eta_ = eta;
    BinomialTable binom(n_max);
    r.lifted_ = detail::binned_binomial_matrix(eta / N, K, n_max, binom);
    r.kernel_ = detail::binned_binomial_matrix(eta, K, n_max, binom);
    r.check_completeness(r.lifted_, 1e-12, "photoelectric response");
    return r;
}

/// On/off detector: outcome 1 iff at least one photon triggers.
inline ResponseMatrix ResponseMatrix::on_off(double eta, int N, int n_max) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("detector.eta: must lie in [0,1]");
    if (N < 1) throw ValidationError("detector.N: must be >= 1");
    if (n_max < 0) throw ValidationError("detector.n_max: must be >= 0");
    ResponseMatrix r;
    r.K_ = 1;
    r.n_max_ = n_max;
    r.N_ = N;
    r.family_ = ResponseFamily::on_off;
    r.eta_ = eta;
    auto fill = [&](double p) {
        std::vector<double> m(2 * (static_cast<std::size_t>(n_max) + 1));
        for (int n = 0; n <= n_max; ++n) {
            double miss = pow_int(1.0 - p, n);
            m[static_cast<std::size_t>(n)] = miss;
            m[static_cast<std::size_t>(n_max) + 1 + static_cast<std::size_t>(n)] = 1.0 - miss;
        }
        return m;
    };
    r.lifted_ = fill(eta / N);
    r.kernel_ = fill(eta);
    return r;
}

/// Custom detector from an explicit at-detector kernel. kernel_rows[k][m] is
/// the probability of outcome k given m photons at the detector; rows k =
/// 0..K, columns m = 0..n_max. Columns must be complete within 1e-9.
inline ResponseMatrix ResponseMatrix::custom(std::vector<std::vector<double>> kernel_rows, int N) {
    if (N < 1) throw ValidationError("detector.N: must be >= 1");
    if (kernel_rows.size() < 2) throw ValidationError("custom response: need at least 2 outcome rows");
    const std::size_t cols = kernel_rows.front().size();
    if (cols == 0) throw ValidationError("custom response: empty rows");
    for (const auto& row : kernel_rows)
        if (row.size() != cols) throw ValidationError("custom response: ragged rows");

    ResponseMatrix r;
    r.K_ = static_cast<int>(kernel_rows.size()) - 1;
    r.n_max_ = static_cast<int>(cols) - 1;
    r.N_ = N;
    r.family_ = ResponseFamily::custom;
    r.kernel_.resize(static_cast<std::size_t>(r.K_ + 1) * cols);
    for (int k = 0; k <= r.K_; ++k)
        for (int m = 0; m <= r.n_max_; ++m)
            r.kernel_[r.idx(k, m)] = kernel_rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
    r.check_completeness(r.kernel_, 1e-9, "custom response");

    // Lifted view: thin the input by the balanced split before the kernel.
    r.lifted_.assign(r.kernel_.size(), 0.0);
    BinomialTable binom(r.n_max_);
    const double q = 1.0 / N;
    for (int n = 0; n <= r.n_max_; ++n) {
        for (int k = 0; k <= r.K_; ++k) {
            KahanSum s;
            for (int m = 0; m <= n; ++m)
                s.add(binom(n, m) * pow_int(q, m) * pow_int(1.0 - q, n - m) * r.kernel_[r.idx(k, m)]);
            r.lifted_[r.idx(k, n)] = s.value();
        }
    }
    return r;
}

/// Outcome probabilities p_k(w) of one detector for a coherent input with
/// intensity w: the Poisson average of the lifted diagonals. Requires the
/// Poisson tail beyond the response's n_max to stay below 1e-10.
inline std::vector<double> coherent_outcome_probs(const ResponseMatrix& resp, double w) {
    if (w < 0) throw ValidationError("coherent.intensity: must be >= 0");
    PhotonDistribution pois = coherent_distribution(w, resp.n_max());  // throws TruncationError if too short
    std::vector<double> out(static_cast<std::size_t>(resp.max_outcome()) + 1, 0.0);
    for (int k = 0; k <= resp.max_outcome(); ++k) {
        KahanSum s;
        for (int n = 0; n <= resp.n_max(); ++n)
            s.add(pois.probs[static_cast<std::size_t>(n)] * resp.prob(k, n));
        out[static_cast<std::size_t>(k)] = s.value();
    }
    return out;
}

}  // namespace clicklab
