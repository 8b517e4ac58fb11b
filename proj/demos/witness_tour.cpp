// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0
//
// Small tour of the witness machinery on sampled data: simulate a heralded
// two-photon state, bootstrap the uncertainties, and print the verdicts.

#include <cstdio>

#include "clicklab/clicklab.hpp"

using namespace clicklab;

int main() {
    TmsvParams source{0.5, 0.5};
    MultiplexConfig config{2, 7};
    auto state = heralded_tmsv_distribution(source, 2);
    auto resp = ResponseMatrix::photoelectric(0.85, 2, 7, state.n_max());

    auto table = sample_clicks(state, resp, config, 200000, 1);
    std::printf("sampled %llu shots over %zu occupation tuples\n",
                static_cast<unsigned long long>(table.shots), table.counts.size());

    auto multi = q_multi(covariance_matrix(table));
    auto bin = q_bin(table);
    auto pois = q_pois(table);

    std::vector<std::function<double(const CountsTable&)>> fns{
        [](const CountsTable& t) { return q_multi(covariance_matrix(t)).value; },
        [](const CountsTable& t) { return q_bin(t).value; },
        [](const CountsTable& t) { return q_pois(t).value; }};
    auto bands = bootstrap_many(table, fns, 300, 2);
    apply_uncertainty(multi, bands[0].std_error);
    apply_uncertainty(bin, bands[1].std_error);
    apply_uncertainty(pois, bands[2].std_error);

    for (const auto* r : {&multi, &bin, &pois})
        std::printf("%-6s value % .5e  std_error %.2e  -> %s\n", r->name.c_str(), r->value,
                    r->std_error, to_string(r->verdict).c_str());
    return 0;
}
