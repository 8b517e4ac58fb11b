// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0
//
// Sweep the heralding outcome of a PDC source at several squeezing levels
// and print the three second-order witnesses next to the closed-form
// expectations, one row per (q_sq, l).

#include <cstdio>

#include "clicklab/clicklab.hpp"

using namespace clicklab;

int main() {
    const double herald_eff = 0.5;
    const double det_eff = 0.85;
    const MultiplexConfig config{2, 7};

    std::printf("%6s %3s %12s %12s %12s %12s %12s\n", "q_sq", "l", "eta_gen", "Q_multi", "Q_bin",
                "Q_pois", "mu_var(th)");
    for (double q_sq : {0.1, 0.3, 0.5}) {
        OracleParams params{q_sq, herald_eff, det_eff, config.detectors};
        for (int l = 0; l <= 5; ++l) {
            auto state = heralded_tmsv_distribution(params.tmsv(), l);
            auto resp = ResponseMatrix::photoelectric(det_eff, config.detectors, config.max_outcome,
                                                      state.n_max());
            auto dist = click_distribution_fock_exact(state, resp, config);

            auto multi = q_multi(covariance_matrix(dist));
            double bin = q_bin(dist).value;
            double pois = q_pois(dist).value;
            auto theory = heralded_mu_theory(params, l);
            std::printf("%6.2f %3d %12.4e %12.4e %12.4e %12.4e %12.4e\n", q_sq, l,
                        eta_gen_theory(params, l), multi.value, bin, pois, theory.variance);
        }
    }
    return 0;
}
