// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clicklab/io.hpp"
#include "clicklab/photon_states.hpp"

using namespace clicklab;
using Catch::Matchers::WithinAbs;

TEST_CASE("fock distribution is a point mass", "[photon-states]") {
    auto vac = fock_distribution(0, 10);
    REQUIRE(vac.probs[0] == 1.0);
    for (int n = 1; n <= 10; ++n) REQUIRE(vac.probs[static_cast<std::size_t>(n)] == 0.0);
    REQUIRE(vac.tail_mass == 0.0);

    auto three = fock_distribution(3, 10);
    REQUIRE(three.probs[3] == 1.0);
    REQUIRE(three.mean() == 3.0);

    REQUIRE_THROWS_AS(fock_distribution(11, 10), TruncationError);
}

TEST_CASE("coherent distribution is Poisson", "[photon-states]") {
    auto vac = coherent_distribution(0.0, 5);
    REQUIRE(vac.probs[0] == 1.0);

    auto one = coherent_distribution(1.0);
    REQUIRE_THAT(one.probs[0], WithinAbs(std::exp(-1.0), 1e-15));
    auto two = coherent_distribution(2.0);
    REQUIRE_THAT(two.probs[2], WithinAbs(2.0 * std::exp(-2.0), 1e-15));

    SECTION("auto truncation meets the default tail policy") {
        for (double w : {0.3, 1.0, 4.5, 20.0}) {
            auto dist = coherent_distribution(w);
            REQUIRE(dist.tail_mass <= default_tail_tol);
            double sum = 0;
            for (double p : dist.probs) sum += p;
            REQUIRE(sum >= 1.0 - default_tail_tol);
            REQUIRE(sum <= 1.0 + 1e-12);
        }
    }

    SECTION("pinned n_max below the tail tolerance is rejected") {
        REQUIRE_THROWS_AS(coherent_distribution(5.0, 6), TruncationError);
    }
}

TEST_CASE("thermal distribution is geometric", "[photon-states]") {
    auto vac = thermal_distribution(0.0, 4);
    REQUIRE(vac.probs[0] == 1.0);

    auto one = thermal_distribution(1.0);
    REQUIRE_THAT(one.probs[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(one.probs[1], WithinAbs(0.25, 1e-15));
    REQUIRE_THAT(one.probs[5], WithinAbs(1.0 / 64.0, 1e-15));
}

TEST_CASE("heralded TMSV photon statistics", "[photon-states]") {
    SECTION("zero residual squeezing gives the Fock state") {
        TmsvParams perfect{0.5, 1.0};
        REQUIRE(perfect.lambda_tilde() == 0.0);
        auto dist = heralded_tmsv_distribution(perfect, 2);
        REQUIRE(dist.probs[2] == 1.0);
        for (int k = 0; k <= dist.n_max(); ++k)
            if (k != 2) REQUIRE(dist.probs[static_cast<std::size_t>(k)] == 0.0);
    }

    SECTION("frozen values at lambda_tilde = 0.5, l = 1") {
        // direct evaluation of C(k,l) (1-lt)^{l+1} lt^{k-l}
        TmsvParams params{0.5, 0.0};  // lt = 0.5
        auto dist = heralded_tmsv_distribution(params, 1);
        REQUIRE_THAT(dist.probs[1], WithinAbs(0.25, 1e-15));
        REQUIRE_THAT(dist.probs[2], WithinAbs(0.25, 1e-15));
        REQUIRE_THAT(dist.probs[3], WithinAbs(0.1875, 1e-15));
        double sum = 0;
        for (double p : dist.probs) sum += p;
        REQUIRE_THAT(sum, WithinAbs(1.0, 1e-10));
    }

    SECTION("l = 0 reduces to a thermal state of mean lt/(1-lt)") {
        TmsvParams params{0.6, 0.5};  // lt = 0.3
        double lt = params.lambda_tilde();
        auto heralded = heralded_tmsv_distribution(params, 0);
        auto thermal = thermal_distribution(lt / (1.0 - lt), heralded.n_max());
        for (int n = 0; n <= heralded.n_max(); ++n)
            REQUIRE_THAT(heralded.probs[static_cast<std::size_t>(n)],
                         WithinAbs(thermal.probs[static_cast<std::size_t>(n)], 1e-12));
    }

    SECTION("extreme residual squeezing with a pinned cutoff is rejected") {
        TmsvParams params{0.999, 0.0};
        REQUIRE_THROWS_AS(heralded_tmsv_distribution(params, 0, 10), TruncationError);
    }
}

TEST_CASE("herald probability", "[photon-states]") {
    SECTION("no pairs produced") {
        TmsvParams off{0.0, 0.7};
        REQUIRE(herald_probability(off, 0) == 1.0);
        REQUIRE(herald_probability(off, 1) == 0.0);
        REQUIRE(herald_probability(off, 3) == 0.0);
    }
    SECTION("frozen evaluations") {
        REQUIRE_THAT(herald_probability({0.5, 1.0}, 1), WithinAbs(0.25, 1e-15));
        REQUIRE_THAT(herald_probability({0.4, 0.5}, 0), WithinAbs(0.75, 1e-15));
    }
    SECTION("normalization over outcomes") {
        for (auto [q, he] : {std::pair{0.3, 0.8}, std::pair{0.7, 0.4}, std::pair{0.5, 1.0}}) {
            TmsvParams params{q, he};
            double sum = 0;
            for (int l = 0; l < 400; ++l) sum += herald_probability(params, l);
            REQUIRE_THAT(sum, WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("builders satisfy positivity and mass bounds", "[photon-states][property]") {
    auto check = [](const PhotonDistribution& dist) {
        double sum = 0;
        for (double p : dist.probs) {
            REQUIRE(p >= 0.0);
            sum += p;
        }
        REQUIRE(sum >= 1.0 - 1e-10);
        REQUIRE(sum <= 1.0 + 1e-12);
        REQUIRE(dist.tail_mass <= 1e-10);
    };
    for (double w : {0.01, 0.5, 2.0, 7.7}) check(coherent_distribution(w));
    for (double nbar : {0.01, 0.5, 3.0}) check(thermal_distribution(nbar));
    for (int l : {0, 1, 4}) {
        check(fock_distribution(l));
        check(heralded_tmsv_distribution({0.5, 0.3}, l));
        check(heralded_tmsv_distribution({0.2, 0.9}, l));
    }
}

TEST_CASE("classical mixture validation", "[photon-states]") {
    ClassicalMixture good{{{0.5, 0.0}, {0.5, 2.0}}};
    REQUIRE_NOTHROW(validate(good));

    ClassicalMixture bad_weight{{{0.6, 1.0}, {0.6, 2.0}}};
    REQUIRE_THROWS_AS(validate(bad_weight), ValidationError);

    ClassicalMixture negative{{{1.5, 1.0}, {-0.5, 2.0}}};
    REQUIRE_THROWS_AS(validate(negative), ValidationError);

    ClassicalMixture bad_intensity{{{1.0, -2.0}}};
    REQUIRE_THROWS_AS(validate(bad_intensity), ValidationError);
}

TEST_CASE("photon distribution CSV round trip", "[photon-states][io]") {
    auto dist = coherent_distribution(1.7);
    auto back = photon_distribution_from_csv_text(to_csv(dist));
    REQUIRE(back.probs.size() == dist.probs.size());
    for (std::size_t n = 0; n < dist.probs.size(); ++n) REQUIRE(back.probs[n] == dist.probs[n]);
}
