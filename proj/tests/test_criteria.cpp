// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clicklab/criteria.hpp"
#include "clicklab/pdc_oracle.hpp"
#include "support.hpp"

using namespace clicklab;
using Catch::Matchers::WithinAbs;

namespace {

struct Dataset {
    std::string name;
    ClickDistribution dist;
};

/// Shared pool of exact distributions used by the identity-chain and
/// Rayleigh-minimality checks.
std::vector<Dataset> exact_datasets() {
    std::vector<Dataset> sets;
    {
        auto state = coherent_distribution(1.0);
        auto resp = ResponseMatrix::photoelectric(0.8, 2, 7, state.n_max());
        sets.push_back({"coherent", click_distribution_fock_exact(state, resp, {2, 7})});
    }
    {
        auto state = thermal_distribution(0.9);
        auto resp = ResponseMatrix::photoelectric(0.7, 2, 5, state.n_max());
        sets.push_back({"thermal", click_distribution_fock_exact(state, resp, {2, 5})});
    }
    {
        auto state = fock_distribution(3);
        auto resp = ResponseMatrix::photoelectric(1.0, 2, 5, state.n_max());
        sets.push_back({"fock3", click_distribution_fock_exact(state, resp, {2, 5})});
    }
    {
        auto state = heralded_tmsv_distribution({0.5, 0.5}, 2);
        auto resp = ResponseMatrix::photoelectric(0.85, 2, 7, state.n_max());
        sets.push_back({"heralded2", click_distribution_fock_exact(state, resp, {2, 7})});
    }
    {
        auto state = heralded_tmsv_distribution({0.4, 0.6}, 1);
        auto resp = ResponseMatrix::photoelectric(0.9, 4, 6, state.n_max());
        sets.push_back({"heralded1_N4", click_distribution_fock_exact(state, resp, {4, 6})});
    }
    return sets;
}

}  // namespace

TEST_CASE("q_multi", "[criteria]") {
    SECTION("coherent light sits exactly at the classical boundary") {
        auto state = coherent_distribution(1.0);
        auto resp = ResponseMatrix::photoelectric(0.8, 2, 7, state.n_max());
        auto dist = click_distribution_fock_exact(state, resp, {2, 7});
        auto r = q_multi(covariance_matrix(dist));
        REQUIRE_THAT(r.value, WithinAbs(0.0, 1e-10));
        REQUIRE(r.verdict == Verdict::consistent_with_classical);
        REQUIRE(r.vector.label == WitnessLabel::multinomial_eigvec);
    }

    SECTION("Fock 1 through two perfect onoff detectors") {
        auto dist = click_distribution_fock_exact(fock_distribution(1),
                                                  ResponseMatrix::on_off(1.0, 2, 1), {2, 1});
        auto r = q_multi(covariance_matrix(dist));
        REQUIRE_THAT(r.value, WithinAbs(-0.5, 1e-14));
        REQUIRE(r.verdict == Verdict::nonclassical);
    }

    SECTION("heralding to vacuum stays consistent with classical") {
        auto state = heralded_tmsv_distribution({0.5, 0.5}, 0, -1, 1e-13);
        auto resp = ResponseMatrix::photoelectric(0.85, 2, 7, state.n_max());
        auto dist = click_distribution_fock_exact(state, resp, {2, 7});
        auto r = q_multi(covariance_matrix(dist));
        REQUIRE(r.value >= -1e-12);
        REQUIRE(r.verdict == Verdict::consistent_with_classical);
    }

    SECTION("exact distributions always carry the kernel eigenvalue at zero or below") {
        for (const auto& d : exact_datasets()) {
            auto r = q_multi(covariance_matrix(d.dist));
            INFO(d.name);
            REQUIRE(r.value <= 1e-12);
        }
    }
}

TEST_CASE("q_bin", "[criteria]") {
    SECTION("coherent input is exactly binomial") {
        auto state = coherent_distribution(1.0);
        auto resp = ResponseMatrix::photoelectric(0.8, 2, 7, state.n_max());
        auto dist = click_distribution_fock_exact(state, resp, {2, 7});
        REQUIRE_THAT(q_bin(dist).value, WithinAbs(0.0, 1e-10));
    }

    SECTION("Fock 1 has zero click-number variance") {
        auto dist = click_distribution_fock_exact(fock_distribution(1),
                                                  ResponseMatrix::on_off(1.0, 2, 1), {2, 1});
        auto r = q_bin(dist);
        REQUIRE_THAT(r.value, WithinAbs(-1.0, 1e-14));
        REQUIRE(r.verdict == Verdict::nonclassical);
    }

    SECTION("vacuum input is degenerate") {
        auto dist = click_distribution_fock_exact(fock_distribution(0),
                                                  ResponseMatrix::on_off(1.0, 2, 0), {2, 1});
        REQUIRE_THROWS_AS(q_bin(dist), DegenerateStatisticsError);
    }

    SECTION("identity chain: B-statistics form equals the M2 projection form") {
        for (const auto& d : exact_datasets()) {
            INFO(d.name);
            const int N = d.dist.config.detectors;
            auto m2 = covariance_matrix(d.dist);
            WitnessVector f = binomial_vector(d.dist.config.max_outcome);
            MultiIndex e0(static_cast<std::size_t>(d.dist.config.max_outcome) + 1, 0);
            e0[0] = 1;
            double pi0 = normal_moment(d.dist, e0);
            double projection = (N - 1) * projected_criterion(m2, f) / (pi0 * (1.0 - pi0));
            REQUIRE_THAT(q_bin(d.dist).value, WithinAbs(projection, 1e-12));
        }
    }
}

TEST_CASE("q_pois", "[criteria]") {
    SECTION("coherent light through unbinned photoelectric detectors is Poisson") {
        auto state = coherent_distribution(1.0);
        // K = n_max leaves the top bin unreachable, i.e. no binning distortion
        auto resp = ResponseMatrix::photoelectric(0.8, 2, state.n_max(), state.n_max());
        auto dist = click_distribution_fock_exact(state, resp, {2, state.n_max()});
        auto r = q_pois(dist);
        REQUIRE_THAT(r.components.at("q_pois"), WithinAbs(0.0, 1e-10));
        REQUIRE_THAT(r.value, WithinAbs(0.0, 1e-10));
    }

    SECTION("Fock 1: frozen Mandel parameters") {
        auto state = fock_distribution(1);
        auto resp = ResponseMatrix::photoelectric(1.0, 2, 3, 1);
        auto dist = click_distribution_fock_exact(state, resp, {2, 3});
        auto r = q_pois(dist);
        REQUIRE_THAT(r.components.at("q_pois"), WithinAbs(-1.0, 1e-14));
        REQUIRE_THAT(r.components.at("q_pois_prime"), WithinAbs(-0.5, 1e-14));
        REQUIRE_THAT(r.value, WithinAbs(-0.5, 1e-14));
    }

    SECTION("vacuum is degenerate") {
        auto dist = click_distribution_fock_exact(fock_distribution(0),
                                                  ResponseMatrix::photoelectric(1.0, 2, 2, 0), {2, 2});
        REQUIRE_THROWS_AS(q_pois(dist), DegenerateStatisticsError);
    }

    SECTION("corrected value equals the M2 projection over the mean") {
        for (const auto& d : exact_datasets()) {
            INFO(d.name);
            auto m2 = covariance_matrix(d.dist);
            WitnessVector f = poisson_vector(d.dist.config.max_outcome);
            auto mu = mu_statistics(d.dist, f);
            auto r = q_pois(d.dist);
            REQUIRE_THAT(r.value, WithinAbs(projected_criterion(m2, f) / mu.mean, 1e-12));
        }
    }

    SECTION("photoelectric identity q_pois = N q_pois_prime on exact data") {
        // K = n_max keeps the top bin unreachable, matching the unbinned model
        for (auto& [nbar, N] : std::vector<std::pair<double, int>>{{0.8, 2}, {0.5, 4}}) {
            auto state = thermal_distribution(nbar, -1, 1e-13);
            auto resp = ResponseMatrix::photoelectric(0.75, N, state.n_max(), state.n_max());
            auto dist = click_distribution_fock_exact(state, resp, {N, state.n_max()});
            auto r = q_pois(dist);
            REQUIRE_THAT(r.components.at("q_pois"), WithinAbs(N * r.components.at("q_pois_prime"), 1e-10));
        }
    }
}

TEST_CASE("projected criteria and mu statistics", "[criteria]") {
    auto state = heralded_tmsv_distribution({0.5, 0.5}, 2);
    auto resp = ResponseMatrix::photoelectric(0.85, 2, 7, state.n_max());
    auto dist = click_distribution_fock_exact(state, resp, {2, 7});
    auto m2 = covariance_matrix(dist);

    SECTION("all-ones vector lies in the kernel") {
        WitnessVector ones{std::vector<double>(8, 1.0), WitnessLabel::custom};
        REQUIRE_THAT(projected_criterion(m2, ones), WithinAbs(0.0, 1e-12));
    }

    SECTION("binomial witness on coherent data vanishes") {
        auto coh = coherent_distribution(1.0);
        auto cresp = ResponseMatrix::photoelectric(0.8, 2, 7, coh.n_max());
        auto cdist = click_distribution_fock_exact(coh, cresp, {2, 7});
        REQUIRE_THAT(projected_criterion(covariance_matrix(cdist), binomial_vector(7)),
                     WithinAbs(0.0, 1e-10));
    }

    SECTION("eigen identity: the q_multi witness reproduces its eigenvalue") {
        auto r = q_multi(m2);
        REQUIRE_THAT(projected_criterion(m2, r.vector), WithinAbs(r.value, 1e-12));
    }

    SECTION("mu statistics of Fock states: mean l/2, variance -l/4") {
        for (int l = 1; l <= 5; ++l) {
            auto fock = fock_distribution(l);
            auto fresp = ResponseMatrix::photoelectric(1.0, 2, 7, l);
            auto fdist = click_distribution_fock_exact(fock, fresp, {2, 7});
            auto mu = mu_statistics(fdist, poisson_vector(7));
            REQUIRE_THAT(mu.mean, WithinAbs(l / 2.0, 1e-12));
            REQUIRE_THAT(mu.variance, WithinAbs(-l / 4.0, 1e-12));
        }
    }

    SECTION("vacuum gives (0, 0)") {
        auto vdist = click_distribution_fock_exact(fock_distribution(0),
                                                   ResponseMatrix::photoelectric(1.0, 2, 3, 0), {2, 3});
        auto mu = mu_statistics(vdist, poisson_vector(3));
        REQUIRE_THAT(mu.mean, WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(mu.variance, WithinAbs(0.0, 1e-15));
    }

    SECTION("heralded exact engine matches the closed-form theory") {
        OracleParams params{0.5, 0.5, 0.85, 2};
        for (int l = 0; l <= 3; ++l) {
            auto cond = heralded_tmsv_distribution(params.tmsv(), l, -1, 1e-13);
            auto r = ResponseMatrix::photoelectric(params.det_eff, 2, cond.n_max(), cond.n_max());
            auto d = click_distribution_fock_exact(cond, r, {2, cond.n_max()});
            auto mu = mu_statistics(d, poisson_vector(cond.n_max()));
            auto theory = heralded_mu_theory(params, l);
            REQUIRE_THAT(mu.mean, WithinAbs(theory.mean, 1e-10));
            REQUIRE_THAT(mu.variance, WithinAbs(theory.variance, 1e-10));
        }
    }
}

TEST_CASE("Rayleigh minimality of q_multi", "[criteria][property]") {
    for (const auto& d : exact_datasets()) {
        INFO(d.name);
        auto m2 = covariance_matrix(d.dist);
        double min_eig = q_multi(m2).value;
        for (auto f : {binomial_vector(d.dist.config.max_outcome),
                       poisson_vector(d.dist.config.max_outcome)}) {
            double ff = 0;
            for (double v : f.f) ff += v * v;
            REQUIRE(min_eig <= projected_criterion(m2, f) / ff + 1e-12);
        }
    }
}

TEST_CASE("scale consistency of signs and verdicts", "[criteria]") {
    for (const auto& d : exact_datasets()) {
        INFO(d.name);
        auto raw = q_multi(covariance_matrix(d.dist, MomentScale::raw));
        auto scaled = q_multi(covariance_matrix(d.dist, MomentScale::scaled));
        REQUIRE(raw.verdict == scaled.verdict);
        REQUIRE((raw.value < -1e-12) == (scaled.value < -1e-12));
    }
}

TEST_CASE("full moment-matrix test", "[criteria]") {
    SECTION("coherent N=4 K=1 is positive semidefinite") {
        auto state = coherent_distribution(0.9);
        auto resp = ResponseMatrix::photoelectric(0.8, 4, 1, state.n_max());
        auto dist = click_distribution_fock_exact(state, resp, {4, 1});
        auto r = full_matrix_test(dist, {4, 1});
        REQUIRE(r.value >= -1e-10);
        REQUIRE(r.verdict == Verdict::consistent_with_classical);
    }

    SECTION("Fock 2 with four perfect onoff detectors is nonclassical") {
        auto dist = click_distribution_fock_exact(fock_distribution(2),
                                                  ResponseMatrix::on_off(1.0, 4, 2), {4, 1});
        auto r = full_matrix_test(dist, {4, 1});
        REQUIRE(r.value < -1e-6);
        REQUIRE(r.verdict == Verdict::nonclassical);
    }

    SECTION("N=2 block structure matches M2 plus first moments") {
        auto state = thermal_distribution(0.8);
        auto resp = ResponseMatrix::photoelectric(0.7, 2, 3, state.n_max());
        auto dist = click_distribution_fock_exact(state, resp, {2, 3});
        auto M = higher_moment_matrix(dist, {2, 3});
        auto m2 = covariance_matrix(dist);
        // pi-block of M equals covariances plus outer product of firsts
        for (int k = 0; k <= 3; ++k)
            for (int kp = 0; kp <= 3; ++kp)
                REQUIRE_THAT(M.at(1 + k, 1 + kp) - M.at(0, 1 + k) * M.at(0, 1 + kp),
                             WithinAbs(m2.at(k, kp), 1e-12));
    }
}

TEST_CASE("bootstrap", "[criteria][sampling]") {
    SECTION("zero-variance data has zero standard error") {
        CountsTable table{{2, 1}, {}, 5000};
        table.counts[{1, 1}] = 5000;
        auto boot = bootstrap(table, [](const CountsTable& t) { return q_bin(t).value; }, 200, 9);
        REQUIRE(boot.std_error == 0.0);
        REQUIRE_FALSE(boot.flagged);
    }

    SECTION("same seed reproduces the standard error") {
        auto state = coherent_distribution(1.0);
        auto resp = ResponseMatrix::photoelectric(0.8, 2, 7, state.n_max());
        auto table = sample_clicks(state, resp, {2, 7}, 20000, 77);
        auto criterion = [](const CountsTable& t) { return q_multi(covariance_matrix(t)).value; };
        auto a = bootstrap(table, criterion, 150, 123);
        auto b = bootstrap(table, criterion, 150, 123);
        REQUIRE(a.std_error == b.std_error);
        REQUIRE(a.std_error > 0.0);
    }

    SECTION("bootstrap error calibrates against the seed-to-seed spread") {
        auto state = coherent_distribution(1.0);
        auto resp = ResponseMatrix::photoelectric(0.8, 2, 7, state.n_max());
        MultiplexConfig config{2, 7};
        auto criterion = [](const CountsTable& t) { return q_multi(covariance_matrix(t)).value; };

        const std::uint64_t shots = 30000;
        std::vector<double> values;
        for (int s = 0; s < 50; ++s)
            values.push_back(criterion(sample_clicks(state, resp, config, shots, 500 + static_cast<std::uint64_t>(s))));
        double mean = 0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double spread = 0;
        for (double v : values) spread += (v - mean) * (v - mean);
        spread = std::sqrt(spread / (static_cast<double>(values.size()) - 1));

        auto table = sample_clicks(state, resp, config, shots, 555);
        auto boot = bootstrap(table, criterion, 200, 31);
        REQUIRE(boot.std_error >= 0.5 * spread);
        REQUIRE(boot.std_error <= 2.0 * spread);
    }

    SECTION("mostly-degenerate resamples are flagged") {
        // three shots on vacuum, one clicking shot: resampling often drops the
        // click and leaves Q_bin undefined
        CountsTable table{{2, 1}, {}, 4};
        table.counts[{2, 0}] = 3;
        table.counts[{1, 1}] = 1;
        auto boot = bootstrap(table, [](const CountsTable& t) { return q_bin(t).value; }, 400, 5);
        REQUIRE(boot.degenerate_share > 0.1);
        REQUIRE(boot.flagged);
    }

    SECTION("resample count guard") {
        CountsTable table{{2, 1}, {}, 10};
        table.counts[{1, 1}] = 10;
        REQUIRE_THROWS_AS(bootstrap(table, [](const CountsTable&) { return 0.0; }, 50, 1),
                          ValidationError);
    }
}

TEST_CASE("verdict policy", "[criteria]") {
    REQUIRE(decide(-1.0, 0.1, {}) == Verdict::nonclassical);          // 10 sigma below zero
    REQUIRE(decide(-1.0, 0.5, {}) == Verdict::consistent_with_classical);  // only 2 sigma
    REQUIRE(decide(-1.0, 0.4, {2.0}) == Verdict::nonclassical);       // looser policy
    CriterionResult r;
    r.value = -0.3;
    apply_uncertainty(r, 0.05, {});
    REQUIRE(r.verdict == Verdict::nonclassical);
    REQUIRE_THAT(r.significance(), WithinAbs(-6.0, 1e-12));
}
