#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "gfsim/pilots.hpp"
#include "oracles.hpp"

using namespace gfsim;

TEST_CASE("pilot pool is orthogonal with unit-modulus entries") {
    for (std::size_t n : {1U, 2U, 8U, 12U, 24U, 48U}) {
        const auto pool = make_pilot_pool(n);
        REQUIRE(pool.size() == n);
        const CMatrix gram = pool.matrix.adjoint() * pool.matrix;
        CHECK((gram - static_cast<double>(n) * CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((pool.matrix.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(make_pilot_pool(0), std::invalid_argument);
}

TEST_CASE("layouts") {
    const auto tsp = make_tsp_layout(24);
    CHECK(tsp.w == 1);
    CHECK(tsp.pool_size == 24);
    CHECK(tsp.bits_per_index == 5);
    CHECK(std::string(tsp.tag()) == "tsp");

    const auto imp = make_imp_layout(24, 2);
    CHECK(imp.pool_size == 12);
    CHECK(imp.bits_per_index == 4);
    CHECK(make_imp_layout(24, 3).pool_size == 8);
    CHECK(make_imp_layout(24, 3).bits_per_index == 3);
    CHECK(make_tsp_layout(1).bits_per_index == 1);
    CHECK(make_tsp_layout(2).bits_per_index == 1);

    CHECK_THROWS_AS(make_tsp_layout(0), std::invalid_argument);
    CHECK_THROWS_AS(make_imp_layout(24, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_imp_layout(24, 5), std::invalid_argument);
    CHECK_THROWS_AS(make_imp_layout(2, 3), std::invalid_argument);
}

TEST_CASE("closed-form collision values") {
    CHECK(std::abs(tsp_collision_probability(24, 3) - 0.121528) < 1e-6);
    CHECK(std::abs(imp_pairwise_collision_probability(12, 2, 3) - 3.0 / 144.0) < 1e-12);
    CHECK(std::abs(imp_pairwise_collision_probability(12, 2, 3) - 0.020833) < 1e-6);

    CHECK(tsp_collision_probability(24, 0) == 0.0);
    CHECK(tsp_collision_probability(24, 1) == 0.0);
    CHECK(tsp_collision_probability(4, 5) == 1.0);
    CHECK(imp_pairwise_collision_probability(2, 1, 50) == 1.0);
    CHECK(imp_pairwise_collision_probability(12, 2, 1) == 0.0);

    CHECK_THROWS_AS(tsp_collision_probability(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(tsp_collision_probability(4, -1), std::invalid_argument);
    CHECK_THROWS_AS(imp_pairwise_collision_probability(12, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(all_pilot_collision_probability(0, 2, 2), std::invalid_argument);
}

TEST_CASE("two-user ratio identity P_imp / P_tsp = 4 / N") {
    for (int n : {8, 16, 24, 48}) {
        const double ratio = imp_pairwise_collision_probability(n / 2, 2, 2) / tsp_collision_probability(n, 2);
        CHECK(std::abs(ratio - 4.0 / n) < 1e-12);
    }
}

TEST_CASE("closed forms agree with exhaustive enumeration") {
    for (int n : {2, 3, 5, 6}) {
        for (int k : {2, 3, 4}) {
            const double brute = oracle::enumerate_collision(n, 1, k, oracle::uniform_pmf(n), true);
            CHECK(std::abs(tsp_collision_probability(n, k) - brute) < 1e-12);
        }
    }
    for (int n : {2, 3, 4}) {
        for (int w : {2, 3}) {
            for (int k : {2, 3}) {
                if (w * k > 9) continue;
                const double brute = oracle::enumerate_collision(n, w, k, oracle::uniform_pmf(n), true);
                CHECK(std::abs(all_pilot_collision_probability(n, w, k) - brute) < 1e-12);
            }
        }
    }
    // the pair approximation is exact for two users
    CHECK(std::abs(imp_pairwise_collision_probability(4, 2, 2) -
                   oracle::enumerate_collision(4, 2, 2, oracle::uniform_pmf(4), true)) < 1e-12);
}

TEST_CASE("non-uniform pmf collision matches enumeration") {
    const std::vector<double> pmf = {0.5, 0.25, 0.25};
    for (int w : {1, 2}) {
        for (int k : {2, 3, 4}) {
            const double brute = oracle::enumerate_collision(3, w, k, pmf, true);
            CHECK(std::abs(all_pilot_collision_probability(pmf, w, k) - brute) < 1e-12);
        }
    }
    const auto uni = oracle::uniform_pmf(12);
    CHECK(std::abs(all_pilot_collision_probability(uni, 2, 4) - all_pilot_collision_probability(12, 2, 4)) < 1e-12);
    CHECK_THROWS_AS(all_pilot_collision_probability(std::vector<double>{}, 2, 2), std::invalid_argument);
}

TEST_CASE("codeword index pmf") {
    const auto pmf = codeword_index_pmf(make_imp_layout(24, 2));
    REQUIRE(pmf.size() == 12);
    double total = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        total += pmf[i];
        CHECK(pmf[i] == doctest::Approx(i < 4 ? 2.0 / 16 : 1.0 / 16));
    }
    CHECK(total == doctest::Approx(1.0));
    // power-of-two pools are uniform
    for (double p : codeword_index_pmf(make_imp_layout(24, 3))) CHECK(p == doctest::Approx(1.0 / 8));
}

TEST_CASE("has_collision events") {
    const std::vector<PilotSelection> a = {{{1, 2}}, {{1, 3}}, {{4, 2}}};
    CHECK_FALSE(has_collision(a, CollisionEvent::AnyPairAllPilots));
    CHECK(has_collision(a, CollisionEvent::AnyTspCollision));
    const std::vector<PilotSelection> b = {{{1, 2}}, {{0, 0}}, {{1, 2}}};
    CHECK(has_collision(b, CollisionEvent::AnyPairAllPilots));
    const std::vector<PilotSelection> one = {{{1, 2}}};
    CHECK_FALSE(has_collision(one, CollisionEvent::AnyTspCollision));
    CHECK_FALSE(has_collision({}, CollisionEvent::AnyPairAllPilots));
}

TEST_CASE("random selections stay inside the pool") {
    Rng rng(3);
    const auto layout = make_imp_layout(24, 3);
    for (int t = 0; t < 1000; ++t) {
        const auto sel = random_pilot_selection(layout, rng);
        REQUIRE(sel.indices.size() == 3);
        for (int idx : sel.indices) CHECK((idx >= 0 && idx < 8));
    }
}

TEST_CASE("Monte Carlo collision rate tracks the exact value") {
    struct Case {
        PilotLayout layout;
        int k;
    };
    for (const auto& c : {Case{make_tsp_layout(24), 3}, Case{make_imp_layout(24, 2), 3}, Case{make_imp_layout(24, 2), 5}}) {
        const auto est = simulate_collision_probability(c.layout, c.k, CollisionEvent::AnyPairAllPilots, 200000, 11);
        const double exact = all_pilot_collision_probability(c.layout.pool_size, c.layout.w, c.k);
        CHECK(est.std_error > 0.0);
        CHECK(std::abs(est.estimate - exact) < 4.0 * oracle::binomial_sigma(exact, 200000));
    }
    const auto layout = make_imp_layout(24, 2);
    const auto pmf = codeword_index_pmf(layout);
    const auto est = simulate_collision_probability(layout, pmf, 4, CollisionEvent::AnyPairAllPilots, 200000, 5);
    const double exact = all_pilot_collision_probability(pmf, 2, 4);
    CHECK(std::abs(est.estimate - exact) < 4.0 * oracle::binomial_sigma(exact, 200000));

    CHECK(simulate_collision_probability(layout, 1, CollisionEvent::AnyTspCollision, 10, 1).estimate == 0.0);
    CHECK_THROWS_AS(simulate_collision_probability(layout, 3, CollisionEvent::AnyTspCollision, 0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_collision_probability(layout, std::vector<double>(5, 0.2), 3,
                                                   CollisionEvent::AnyTspCollision, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("any-position collision matches enumeration") {
    const auto layout = make_imp_layout(6, 2);
    const double brute = oracle::enumerate_collision(3, 2, 3, oracle::uniform_pmf(3), false);
    const auto est = simulate_collision_probability(layout, 3, CollisionEvent::AnyTspCollision, 200000, 9);
    CHECK(std::abs(est.estimate - brute) < 4.0 * oracle::binomial_sigma(brute, 200000));
}
