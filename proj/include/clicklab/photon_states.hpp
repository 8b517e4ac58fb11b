// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "clicklab/binomial.hpp"
#include "clicklab/errors.hpp"

namespace clicklab {

/// Default tail tolerance of the truncation policy: builders extend the
/// photon cutoff until the mass beyond it drops below this bound, unless the
/// caller pins n_max explicitly.
inline constexpr double default_tail_tol = 1e-10;

/// Hard cap on automatic truncation growth.
inline constexpr int max_auto_n = 1 << 21;

/// Truncated photon-number distribution. probs[n] is the probability of n
/// photons for n = 0..n_max; tail_mass is a declared upper bound on the
/// probability mass beyond n_max.
struct PhotonDistribution {
    std::vector<double> probs;
    double tail_mass = 0.0;

    int n_max() const { return static_cast<int>(probs.size()) - 1; }

    double mean() const {
        KahanSum s;
        for (int n = 0; n <= n_max(); ++n) s.add(n * probs[static_cast<std::size_t>(n)]);
        return s.value();
    }
};

/// Finite mixture of coherent intensities; a discrete nonnegative P function.
/// Phases are dropped: every implemented POVM is photon-number diagonal, so
/// only w = |alpha|^2 enters any observable.
struct ClassicalMixture {
    struct Component {
        double weight;
        double intensity;
    };
    std::vector<Component> components;
};

inline void validate(const ClassicalMixture& mix) {
    if (mix.components.empty()) throw ValidationError("mixture.components: must be non-empty");
    KahanSum total;
    for (std::size_t i = 0; i < mix.components.size(); ++i) {
        const auto& c = mix.components[i];
        if (c.weight < 0)
            throw ValidationError("mixture.components[" + std::to_string(i) + "].weight: must be >= 0");
        if (c.intensity < 0)
            throw ValidationError("mixture.components[" + std::to_string(i) + "].intensity: must be >= 0");
        total.add(c.weight);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw ValidationError("mixture.components: weights must sum to 1 within 1e-12");
}

/// Two-mode squeezed vacuum with a heralding detector of efficiency
/// herald_eff; lambda_tilde = (1 - herald_eff) * q_sq is the squeezing
/// parameter seen by the heralded signal mode.
struct TmsvParams {
    double q_sq;
    double herald_eff;

    double lambda_tilde() const { return (1.0 - herald_eff) * q_sq; }
};

inline void validate(const TmsvParams& p) {
    if (!(p.q_sq >= 0.0 && p.q_sq < 1.0)) throw ValidationError("tmsv.q_sq: must lie in [0,1)");
    if (!(p.herald_eff >= 0.0 && p.herald_eff <= 1.0))
        throw ValidationError("tmsv.herald_eff: must lie in [0,1]");
}

namespace detail {

/// Builds a distribution from a pmf recurrence. `first` is p(0); `ratio(n)`
/// maps p(n-1) to p(n). `tail(n, p_n)` returns an upper bound on the mass
/// beyond n, or a negative value when no closed form exists (then 1 - sum is
/// used). Auto mode doubles the cutoff until the bound meets `tol`.
template <class Ratio, class Tail>
PhotonDistribution build_from_recurrence(double first, Ratio ratio, Tail tail, int pinned_n_max,
                                         double tol, const char* what) {
    auto eval_to = [&](int n_max) {
        std::vector<double> probs(static_cast<std::size_t>(n_max) + 1);
        probs[0] = first;
        for (int n = 1; n <= n_max; ++n)
            probs[static_cast<std::size_t>(n)] = probs[static_cast<std::size_t>(n) - 1] * ratio(n);
        return probs;
    };
    auto mass = [](const std::vector<double>& probs) {
        KahanSum s;
        for (double p : probs) s.add(p);
        return s.value();
    };

    int n_max = pinned_n_max;
    if (pinned_n_max < 0) {
        n_max = 16;
        while (true) {
            auto probs = eval_to(n_max);
            double bound = tail(n_max, probs.back());
            if (bound < 0) bound = std::max(0.0, 1.0 - mass(probs));
            if (bound <= tol) break;
            if (n_max >= max_auto_n)
                throw TruncationError(std::string(what) + ": tail mass above tolerance at n_max cap " +
                                      std::to_string(max_auto_n));
            n_max *= 2;
        }
    }

    PhotonDistribution dist;
    dist.probs = eval_to(n_max);
    dist.tail_mass = std::max(0.0, 1.0 - mass(dist.probs));
    if (pinned_n_max >= 0 && dist.tail_mass > tol)
        throw TruncationError(std::string(what) + ": tail mass " + std::to_string(dist.tail_mass) +
                              " above tolerance at pinned n_max " + std::to_string(pinned_n_max));
    return dist;
}

}  // namespace detail

/// Point mass at photon number l.
inline PhotonDistribution fock_distribution(int l, int n_max = -1) {
    if (l < 0) throw ValidationError("fock.l: must be >= 0");
    if (n_max < 0) n_max = l;
    if (l > n_max)
        throw TruncationError("fock.l: l = " + std::to_string(l) + " exceeds n_max = " + std::to_string(n_max));
    PhotonDistribution dist;
    dist.probs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    dist.probs[static_cast<std::size_t>(l)] = 1.0;
    dist.tail_mass = 0.0;
    return dist;
}

/// Poisson photon statistics of a coherent state with intensity w = |alpha|^2.
inline PhotonDistribution coherent_distribution(double w, int n_max = -1,
                                                double tol = default_tail_tol) {
    if (w < 0) throw ValidationError("coherent.intensity: must be >= 0");
    return detail::build_from_recurrence(
        std::exp(-w), [w](int n) { return w / n; },
        [w](int n, double p_n) {
            // geometric domination of the Poisson tail once n + 2 > w
            double r = w / (n + 2);
            return r < 1.0 ? p_n * r / (1.0 - r) : -1.0;
        },
        n_max, tol, "coherent");
}

/// Geometric photon statistics of a thermal state with mean nbar.
inline PhotonDistribution thermal_distribution(double nbar, int n_max = -1,
                                               double tol = default_tail_tol) {
    if (nbar < 0) throw ValidationError("thermal.mean: must be >= 0");
    const double r = nbar / (1.0 + nbar);
    return detail::build_from_recurrence(
        1.0 / (1.0 + nbar), [r](int) { return r; },
        [r](int, double p_n) { return r < 1.0 ? p_n * r / (1.0 - r) : -1.0; }, n_max, tol, "thermal");
}

/// Photon statistics of the signal mode of a TMSV state heralded on outcome l
/// of a photon-number-resolving detector with efficiency herald_eff:
/// p(k) = C(k,l) (1-lt)^{l+1} lt^{k-l} for k >= l, with lt = lambda_tilde.
/// lt = 0 reduces to the Fock state |l>, l = 0 to a thermal state.
inline PhotonDistribution heralded_tmsv_distribution(const TmsvParams& params, int l, int n_max = -1,
                                                     double tol = default_tail_tol) {
    validate(params);
    if (l < 0) throw ValidationError("heralded.l: must be >= 0");
    if (n_max >= 0 && l > n_max)
        throw TruncationError("heralded.l: l exceeds pinned n_max");
    const double lt = params.lambda_tilde();
    const double p_l = pow_int(1.0 - lt, l + 1);

    // The support starts at l; build the shifted sequence q(j) = p(j + l)
    // with the recurrence q(j)/q(j-1) = lt (j + l) / j, then prepend zeros.
    auto shifted_ratio = [lt, l](int j) { return lt * (j + l) / static_cast<double>(j); };
    auto shifted_tail = [lt, l](int j, double q_j) {
        double rho = lt * (j + 1 + l) / (j + 1.0);
        return rho < 1.0 ? q_j * rho / (1.0 - rho) : -1.0;
    };
    int pinned_shifted = n_max >= 0 ? n_max - l : -1;
    PhotonDistribution shifted = detail::build_from_recurrence(p_l, shifted_ratio, shifted_tail,
                                                               pinned_shifted, tol, "heralded");
    PhotonDistribution dist;
    dist.probs.assign(static_cast<std::size_t>(l), 0.0);
    dist.probs.insert(dist.probs.end(), shifted.probs.begin(), shifted.probs.end());
    dist.tail_mass = shifted.tail_mass;
    return dist;
}

/// Marginal probability that the heralding detector reports outcome l.
inline double herald_probability(const TmsvParams& params, int l) {
    validate(params);
    if (l < 0) throw ValidationError("herald.l: must be >= 0");
    const double u = params.q_sq;
    const double denom = 1.0 - u * (1.0 - params.herald_eff);
    return (1.0 - u) / denom * pow_int(params.herald_eff * u / denom, l);
}

}  // namespace clicklab
