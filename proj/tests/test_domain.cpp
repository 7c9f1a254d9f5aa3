#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "simbound/domain.hpp"

using namespace simbound;

TEST_CASE("domain construction validates the box") {
    CHECK_THROWS_AS(TestDomain({0.0, 0.0}, {1.0}), DimensionError);
    CHECK_THROWS_AS(TestDomain({}, {}), ParameterError);
    CHECK_THROWS_AS(TestDomain({0.0}, {0.0}), ParameterError);
    CHECK_THROWS_AS(TestDomain({1.0}, {0.0}), ParameterError);
    const TestDomain d({-1.0, 0.0}, {1.0, 2.0});
    CHECK(d.dim() == 2);
    CHECK(d.width(0) == doctest::Approx(2.0));
    CHECK(d.center() == TestPoint{0.0, 1.0});
}

TEST_CASE("contains is boundary-inclusive") {
    const TestDomain square({-1.0, -1.0}, {1.0, 1.0});
    CHECK(contains(square, TestPoint{0.0, 0.0}));
    CHECK(contains(square, TestPoint{1.0, 1.0}));
    CHECK_FALSE(contains(square, TestPoint{1.0001, 0.0}));

    const TestDomain velocity_range({-0.2}, {0.3});
    CHECK_FALSE(contains(velocity_range, TestPoint{0.31}));
    CHECK(contains(velocity_range, TestPoint{0.3}));

    CHECK_THROWS_AS(contains(square, TestPoint{0.0}), DimensionError);
}

TEST_CASE("clamp projects onto the box and is idempotent") {
    const TestDomain square({-1.0, -1.0}, {1.0, 1.0});
    CHECK(clamp(square, TestPoint{2.0, 0.5}) == TestPoint{1.0, 0.5});
    CHECK(clamp(square, TestPoint{0.0, 0.0}) == TestPoint{0.0, 0.0});

    const TestDomain unit({0.0}, {1.0});
    CHECK(clamp(unit, TestPoint{-3.0}) == TestPoint{0.0});

    CHECK_THROWS_AS(clamp(square, TestPoint{0.0}), DimensionError);

    SeededRng rng(99, 0);
    const TestDomain box({-2.0, 0.5, -1.0}, {-1.0, 3.5, 4.0});
    for (int i = 0; i < 200; ++i) {
        TestPoint p;
        for (int j = 0; j < 3; ++j) p.coords.push_back(rng.uniform(-10.0, 10.0));
        const TestPoint q = clamp(box, p);
        CHECK(contains(box, q));
        CHECK(clamp(box, q) == q);
    }
}

TEST_CASE("signal construction validates shape") {
    CHECK_THROWS_AS(Signal(0.0, 0.0, {{1.0}}), ParameterError);
    CHECK_THROWS_AS(Signal(0.0, -0.1, {{1.0}}), ParameterError);
    CHECK_THROWS_AS(Signal(0.0, 0.1, {{1.0}, {1.0, 2.0}}), DimensionError);
    const Signal s(0.5, 0.1, {{1.0, 2.0}, {3.0, 4.0}});
    CHECK(s.size() == 2);
    CHECK(s.state_dim() == 2);
    CHECK(s.duration() == doctest::Approx(0.1));
    CHECK(s.t_end() == doctest::Approx(0.6));
}

TEST_CASE("sample_at interpolates linearly and is exact at nodes") {
    const Signal two(0.0, 1.0, {{0.0}, {2.0}});
    CHECK(sample_at(two, 0.5)[0] == doctest::Approx(1.0));
    CHECK(sample_at(two, 0.0)[0] == 0.0);
    CHECK(sample_at(two, 1.0)[0] == 2.0);

    const Signal three(0.0, 0.5, {{0.0}, {2.0}, {4.0}});
    CHECK(sample_at(three, 0.75)[0] == doctest::Approx(3.0));
    for (std::size_t i = 0; i < three.size(); ++i)
        CHECK(sample_at(three, 0.5 * double(i))[0] == three.samples[i][0]);

    CHECK_THROWS_AS(sample_at(three, -0.2), HorizonError);
    CHECK_THROWS_AS(sample_at(three, 1.2), HorizonError);
    CHECK(sample_coord_at(three, 0.75, 0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(sample_coord_at(three, 0.75, 1), DimensionError);
}

TEST_CASE("equal seed and stream reproduce draws bitwise") {
    SeededRng a(1234, 7);
    SeededRng b(1234, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    SeededRng c(1234, 7);
    SeededRng d(1234, 8);
    bool any_diff = false;
    for (int i = 0; i < 16; ++i) any_diff |= (c.next_u64() != d.next_u64());
    CHECK(any_diff);
}

TEST_CASE("derive depends only on seed, stream, and k") {
    SeededRng fresh(42, 3);
    SeededRng drained(42, 3);
    for (int i = 0; i < 50; ++i) drained.next_u64();

    SeededRng c1 = fresh.derive(5);
    SeededRng c2 = drained.derive(5);
    for (int i = 0; i < 20; ++i) CHECK(c1.next_u64() == c2.next_u64());

    CHECK(fresh.derive(5).stream() == fresh.derive(5).stream());
    CHECK(fresh.derive(5).stream() != fresh.derive(6).stream());
    CHECK(fresh.derive(5).seed() == 42);
}

TEST_CASE("variates land in their supports") {
    SeededRng rng(2024, 1);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-3.0, -1.0);
        CHECK(v >= -3.0);
        CHECK(v <= -1.0);
    }
    double sum = 0.0;
    double sum2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal(0.0, 1.0);
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));

    const TestDomain box({-1.0, 2.0}, {1.0, 5.0});
    for (int i = 0; i < 200; ++i) CHECK(contains(box, rng.uniform_in(box)));
}
