#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "simbound/oracles.hpp"

using namespace simbound;
using namespace simbound::oracles;

TEST_CASE("grid_optimum finds known optima") {
    GridSpec grid;
    grid.points_per_dim = 101;
    grid.domain = TestDomain({-1.0, -1.0}, {1.0, 1.0});

    const auto bowl = grid_optimum(
        [](const TestPoint& z) { return -(z[0] * z[0] + z[1] * z[1]); }, grid, OptMode::Max);
    CHECK(bowl.argopt == TestPoint{0.0, 0.0});
    CHECK(bowl.value == doctest::Approx(0.0));

    GridSpec line;
    line.points_per_dim = 11;
    line.domain = TestDomain({0.0}, {1.0});
    const auto ramp = grid_optimum([](const TestPoint& z) { return z[0]; }, line, OptMode::Max);
    CHECK(ramp.argopt == TestPoint{1.0});
    CHECK(ramp.value == doctest::Approx(1.0));
}

TEST_CASE("grid_optimum ties go to the lexicographically smallest point") {
    GridSpec grid;
    grid.points_per_dim = 201;
    grid.domain = TestDomain({-1.0}, {1.0});
    const auto gap = grid_optimum(
        [](const TestPoint& z) { return 0.05 + 0.1 * std::abs(z[0]); }, grid, OptMode::Max);
    CHECK(gap.value == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(gap.argopt == TestPoint{-1.0});

    GridSpec flat;
    flat.points_per_dim = 5;
    flat.domain = TestDomain({-1.0, -1.0}, {1.0, 1.0});
    const auto c = grid_optimum([](const TestPoint&) { return 3.0; }, flat, OptMode::Min);
    CHECK(c.argopt == TestPoint{-1.0, -1.0});
}

TEST_CASE("grid max/min duality") {
    GridSpec grid;
    grid.points_per_dim = 57;
    grid.domain = TestDomain({-2.0}, {0.5});
    const auto f = [](const TestPoint& z) { return std::sin(3.0 * z[0]) + 0.2 * z[0]; };
    const auto neg_f = [&](const TestPoint& z) { return -f(z); };
    const auto mx = grid_optimum(f, grid, OptMode::Max);
    const auto mn = grid_optimum(neg_f, grid, OptMode::Min);
    CHECK(mx.value == doctest::Approx(-mn.value).epsilon(1e-15));
    CHECK(mx.argopt == mn.argopt);
}

TEST_CASE("grid budget is enforced") {
    GridSpec grid;
    grid.points_per_dim = 5000;
    grid.domain = TestDomain({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
    grid.budget = 1u << 20;
    CHECK_THROWS_AS(grid_optimum([](const TestPoint&) { return 0.0; }, grid, OptMode::Max),
                    BudgetError);
}

TEST_CASE("grid_point maps flat indices row-major") {
    GridSpec grid;
    grid.points_per_dim = 3;
    grid.domain = TestDomain({0.0, 10.0}, {1.0, 20.0});
    CHECK(grid_point(grid, 0) == TestPoint{0.0, 10.0});
    CHECK(grid_point(grid, 1) == TestPoint{0.0, 15.0});
    CHECK(grid_point(grid, 3) == TestPoint{0.5, 10.0});
    CHECK(grid_point(grid, 8) == TestPoint{1.0, 20.0});
    CHECK_THROWS_AS(grid_point(grid, 9), ParameterError);

    // grid_point visits exactly the points grid_optimum scans, in order.
    std::vector<TestPoint> seen;
    grid_optimum(
        [&](const TestPoint& z) {
            seen.push_back(z);
            return 0.0;
        },
        grid, OptMode::Max);
    REQUIRE(seen.size() == 9);
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == grid_point(grid, i));
}

TEST_CASE("mc_expectation on a constant sampler") {
    const auto est =
        mc_expectation([](SeededRng&) { return 2.75; }, 64, SeededRng(1, 0));
    CHECK(est.mean == doctest::Approx(2.75).epsilon(1e-15));
    CHECK(est.stderr_of_mean == doctest::Approx(0.0));
    CHECK(est.count == 64);
}

TEST_CASE("mc_expectation on the fair sign sampler") {
    const auto coin = [](SeededRng& rng) { return rng.uniform01() < 0.5 ? -1.0 : 1.0; };
    const auto est = mc_expectation(coin, 10000, SeededRng(77, 0));
    CHECK(est.mean >= -0.05);
    CHECK(est.mean <= 0.05);
    CHECK(est.stderr_of_mean == doctest::Approx(0.01).epsilon(0.01));
}

TEST_CASE("standard error halves when M quadruples") {
    const auto noisy = [](SeededRng& rng) { return rng.normal(0.0, 1.0); };
    const auto small = mc_expectation(noisy, 2000, SeededRng(5, 1));
    const auto big = mc_expectation(noisy, 8000, SeededRng(5, 2));
    const double ratio = small.stderr_of_mean / big.stderr_of_mean;
    CHECK(ratio > 2.0 * 0.8);
    CHECK(ratio < 2.0 * 1.2);
}

TEST_CASE("mc_expectation validates M and is seed-deterministic") {
    const auto noisy = [](SeededRng& rng) { return rng.normal(0.0, 1.0); };
    CHECK_THROWS_AS(mc_expectation(noisy, 1, SeededRng(1, 0)), ParameterError);
    const auto a = mc_expectation(noisy, 100, SeededRng(9, 3));
    const auto b = mc_expectation(noisy, 100, SeededRng(9, 3));
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_of_mean == b.stderr_of_mean);
}

TEST_CASE("dense_gp_solve closed forms") {
    KernelSpec k;
    k.lengthscales = {1.0};
    k.signal_variance = 1.0;

    Dataset one;
    one.append(TestPoint{0.3}, -1.25);
    const auto at_train = dense_gp_solve(one, k, 0.0, TestPoint{0.3});
    CHECK(at_train.mean == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(at_train.variance == doctest::Approx(0.0).epsilon(1e-12));

    // Two points, hand 2x2 solve by symmetry (see the gp test for the
    // derivation): weights (a, -a) with a = 1/(1.1 - exp(-1/2)).
    Dataset two;
    two.append(TestPoint{0.0}, 1.0);
    two.append(TestPoint{1.0}, -1.0);
    const double a = 1.0 / (1.1 - std::exp(-0.5));
    const auto mid = dense_gp_solve(two, k, 0.1, TestPoint{0.5});
    CHECK(mid.mean == doctest::Approx(0.0).epsilon(1e-12));
    const auto quarter = dense_gp_solve(two, k, 0.1, TestPoint{0.25});
    CHECK(quarter.mean ==
          doctest::Approx(a * (std::exp(-0.5 * 0.0625) - std::exp(-0.5 * 0.5625)))
              .epsilon(1e-12));

    // Variance at the midpoint, by hand: k(z)^T (K+0.1I)^{-1} k(z) with
    // k(z) = (q, q), q = exp(-1/8); the symmetric solve gives weight
    // q/(1.1+exp(-1/2)) per component.
    const double q = std::exp(-0.125);
    const double var_hand = 1.0 - 2.0 * q * q / (1.1 + std::exp(-0.5));
    CHECK(mid.variance == doctest::Approx(var_hand).epsilon(1e-12));
}

TEST_CASE("dense_gp_solve rejects singular systems without regularization") {
    KernelSpec k;
    k.lengthscales = {1.0};
    k.signal_variance = 1.0;
    Dataset dup;
    dup.append(TestPoint{0.5}, 1.0);
    dup.append(TestPoint{0.5}, 1.0);
    CHECK_THROWS_AS(dense_gp_solve(dup, k, 0.0, TestPoint{0.1}), NumericalError);
}
