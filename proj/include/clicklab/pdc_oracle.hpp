// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>

#include "clicklab/binomial.hpp"
#include "clicklab/criteria.hpp"
#include "clicklab/errors.hpp"

namespace clicklab {

/// Closed-form model of a TMSV source with a heralding photoelectric
/// detector (efficiency herald_eff) and N multiplexed photoelectric
/// detectors (efficiency det_eff, unbinned outcomes). Ground truth for the
/// exact engine and the Monte Carlo pipeline.
struct OracleParams {
    double q_sq;
    double herald_eff;
    double det_eff;
    int detectors;

    double lambda_tilde() const { return (1.0 - herald_eff) * q_sq; }
    TmsvParams tmsv() const { return {q_sq, herald_eff}; }
};

inline void validate(const OracleParams& p) {
    if (!(p.q_sq >= 0.0 && p.q_sq < 1.0)) throw ValidationError("oracle.q_sq: must lie in [0,1)");
    if (!(p.herald_eff >= 0.0 && p.herald_eff <= 1.0))
        throw ValidationError("oracle.herald_eff: must lie in [0,1]");
    if (!(p.det_eff >= 0.0 && p.det_eff <= 1.0)) throw ValidationError("oracle.det_eff: must lie in [0,1]");
    if (p.detectors < 1) throw ValidationError("oracle.N: must be >= 1");
}

/// Two-mode generating function Gamma(z, x_norm) of the heralded detection
/// model: (1-u) / (1 - u (1 - he + he z)(1 - e + e x_norm/N)) with u = q_sq,
/// he = herald_eff, e = det_eff. z in [0,1] weights the herald outcomes,
/// x_norm = ||x|| in [0,N] the multiplexed detector outcomes.
inline double generating_function(const OracleParams& p, double z, double x_norm) {
    validate(p);
    const double zp = 1.0 - p.herald_eff + p.herald_eff * z;
    const double xp = 1.0 - p.det_eff + p.det_eff * x_norm / p.detectors;
    const double denom = 1.0 - p.q_sq * zp * xp;
    if (denom <= 0.0)
        throw ValidationError("oracle.generating_function: nonpositive denominator at z=" +
                              std::to_string(z) + ", x_norm=" + std::to_string(x_norm));
    return (1.0 - p.q_sq) / denom;
}

/// Mixed derivative d^k/d x_norm^k d^l/d z^l of the generating function,
/// evaluated at (z, x_norm). Closed form with the finite j-sum; each term is
/// assembled without dividing by z', x', or u so boundary evaluations
/// (z' = 0, u = 0) stay finite.
inline double gf_derivative(const OracleParams& p, int k, int l, double z, double x_norm) {
    validate(p);
    if (k < 0 || l < 0) throw ValidationError("oracle.gf_derivative: orders must be >= 0");
    if (k + l > 150) throw SizeError("oracle.gf_derivative: order too large for double factorials");
    const double u = p.q_sq;
    const double zp = 1.0 - p.herald_eff + p.herald_eff * z;
    const double xp = 1.0 - p.det_eff + p.det_eff * x_norm / p.detectors;
    const double denom = 1.0 - u * zp * xp;
    if (denom <= 0.0)
        throw ValidationError("oracle.gf_derivative: nonpositive denominator");
    if (k == 0 && l == 0) return (1.0 - u) / denom;

    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    // chain-rule factors for z -> z' and x_norm -> x'
    const double chain = pow_int(p.det_eff / p.detectors, k) * pow_int(p.herald_eff, l);
    KahanSum sum;
    for (int j = 0; j <= std::min(k, l); ++j) {
        double term = fact(k + l - j) / (fact(j) * fact(k - j) * fact(l - j));
        term *= pow_int(u, k + l - j) * pow_int(zp, k - j) * pow_int(xp, l - j);
        term /= pow_int(denom, k + l + 1 - j);
        sum.add(term);
    }
    return (1.0 - u) * fact(k) * fact(l) * chain * sum.value();
}

/// Marginal statistics of the heralding detector; geometric in l.
inline double herald_marginal(const OracleParams& p, int l) {
    validate(p);
    if (l < 0) throw ValidationError("oracle.l: must be >= 0");
    const double u = p.q_sq;
    const double denom = 1.0 - u * (1.0 - p.herald_eff);
    return (1.0 - u) / denom * pow_int(p.herald_eff * u / denom, l);
}

/// Marginal statistics of one multiplexed detector; geometric in k.
inline double detector_marginal(const OracleParams& p, int k) {
    validate(p);
    if (k < 0) throw ValidationError("oracle.k: must be >= 0");
    const double u = p.q_sq;
    const double y = p.det_eff / p.detectors;
    const double denom = 1.0 - u * (1.0 - y);
    return (1.0 - u) / denom * pow_int(y * u / denom, k);
}

/// Mean and normally ordered variance of mu = sum_k k pi_k for the l-th
/// heralded state:
///   <:mu:>          = (eta/N) (lt + l) / (1 - lt)
///   <:(Delta mu)^2:> = (eta/N)^2 [(lt + l)^2 - l (l+1)] / (1 - lt)^2
/// with lt = (1 - herald_eff) q_sq. lt = 0 recovers the Fock state |l>.
inline MuStats heralded_mu_theory(const OracleParams& p, int l) {
    validate(p);
    if (l < 0) throw ValidationError("oracle.l: must be >= 0");
    const double lt = p.lambda_tilde();
    const double scale = p.det_eff / p.detectors;
    const double mean = scale * (lt + l) / (1.0 - lt);
    const double var = scale * scale * ((lt + l) * (lt + l) - static_cast<double>(l) * (l + 1)) /
                       ((1.0 - lt) * (1.0 - lt));
    return {mean, var};
}

/// Expected generation efficiency of the l-th heralded state; decays
/// geometrically in l and equals the herald marginal.
inline double eta_gen_theory(const OracleParams& p, int l) { return herald_marginal(p, l); }

}  // namespace clicklab
