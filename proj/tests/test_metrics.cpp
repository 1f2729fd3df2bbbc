#include <doctest.h>

#include <random>

#include "maskprop/metrics.hpp"
#include "oracles.hpp"

using namespace maskprop;
using metrics::BinaryMask;

TEST_CASE("jaccard basics") {
    BinaryMask a(10, 10), b(10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 5; ++x) a.at(x, y) = 1;
    CHECK(metrics::jaccard(a, a) == 1.0);

    for (int y = 0; y < 10; ++y)
        for (int x = 6; x < 10; ++x) b.at(x, y) = 1;
    CHECK(metrics::jaccard(a, b) == 0.0);

    CHECK(metrics::jaccard(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);

    // two 10x10 squares overlapping on a 10x5 strip
    BinaryMask p(15, 10), g(15, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            p.at(x, y) = 1;
            g.at(x + 5, y) = 1;
        }
    CHECK(metrics::jaccard(p, g) == doctest::Approx(50.0 / 150.0));

    CHECK_THROWS_AS(metrics::jaccard(BinaryMask(3, 3), BinaryMask(4, 3)), std::invalid_argument);
}

TEST_CASE("boundary_f basics") {
    BinaryMask a(12, 12);
    for (int y = 3; y < 9; ++y)
        for (int x = 3; x < 9; ++x) a.at(x, y) = 1;
    CHECK(metrics::boundary_f(a, a, 1.0) == 1.0);

    // boundary shifted one pixel, generous tolerance
    BinaryMask shifted(12, 12);
    for (int y = 3; y < 9; ++y)
        for (int x = 4; x < 10; ++x) shifted.at(x, y) = 1;
    CHECK(metrics::boundary_f(shifted, a, 2.0) == 1.0);
    CHECK(metrics::boundary_f(shifted, a, 0.5) < 1.0);

    CHECK(metrics::boundary_f(BinaryMask(12, 12), a, 2.0) == 0.0);
    CHECK(metrics::boundary_f(BinaryMask(5, 5), BinaryMask(5, 5), 1.0) == 1.0);
}

TEST_CASE("jaccard and boundary_f match brute-force oracles") {
    std::mt19937 rng(311);
    for (int trial = 0; trial < 200; ++trial) {
        BinaryMask p = oracles::random_mask(rng, 16, 16);
        BinaryMask g = oracles::random_mask(rng, 16, 16);
        CHECK(metrics::jaccard(p, g) == oracles::jaccard_oracle(p, g));
        double tol = metrics::default_boundary_tolerance(16, 16);
        CHECK(metrics::boundary_f(p, g, tol) == oracles::boundary_f_oracle(p, g, tol));
    }
}

TEST_CASE("swapping pred and gt") {
    std::mt19937 rng(317);
    for (int trial = 0; trial < 25; ++trial) {
        BinaryMask p = oracles::random_mask(rng, 12, 12);
        BinaryMask g = oracles::random_mask(rng, 12, 12);
        CHECK(metrics::jaccard(p, g) == metrics::jaccard(g, p));
        CHECK(metrics::boundary_f(p, g, 2.0) == doctest::Approx(metrics::boundary_f(g, p, 2.0)));
    }
}

TEST_CASE("sequence_stats") {
    auto s = metrics::sequence_stats({0.8, 0.8, 0.8, 0.8, 0.8, 0.8, 0.8, 0.8});
    CHECK(s.mean == doctest::Approx(0.8));
    CHECK(s.recall == 1.0);
    CHECK(s.decay == doctest::Approx(0.0));

    s = metrics::sequence_stats({1.0, 1.0, 0.0, 0.0});
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.decay == doctest::Approx(1.0));

    s = metrics::sequence_stats({0.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(s.mean == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.decay == 0.0);

    CHECK_THROWS_AS(metrics::sequence_stats({1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("overall mean and one-decimal reporting") {
    CHECK(metrics::overall(57.7, 62.4) == doctest::Approx(60.05));
    CHECK(metrics::overall_rounded(57.7, 62.4) == doctest::Approx(60.1));
    CHECK(metrics::overall_rounded(71.0, 78.4) == doctest::Approx(74.7));
    CHECK(metrics::overall(33.3, 33.3) == doctest::Approx(33.3));
}

TEST_CASE("overall reproduces the published leaderboard aggregation") {
    // overall, j_mean, f_mean per team
    const double rows[][3] = {
        {74.7, 71.0, 78.4}, {73.8, 71.9, 75.8}, {69.7, 66.9, 72.5},
        {69.5, 67.5, 71.5}, {67.8, 65.1, 70.6}, {66.3, 64.1, 68.6},
        {60.6, 58.4, 62.9}, {60.1, 57.7, 62.4}, {58.9, 56.7, 61.1},
    };
    for (const auto& row : rows)
        CHECK(std::fabs(metrics::overall(row[1], row[2]) - row[0]) <= 0.05 + 1e-9);
}
