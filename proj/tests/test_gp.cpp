#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "simbound/gp.hpp"
#include "simbound/oracles.hpp"

using namespace simbound;

namespace {

KernelSpec unit_se(std::size_t dim = 1) {
    KernelSpec k;
    k.family = KernelFamily::SquaredExponential;
    k.lengthscales.assign(dim, 1.0);
    k.signal_variance = 1.0;
    return k;
}

Dataset random_dataset(std::size_t n, std::size_t dim, SeededRng& rng) {
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
        TestPoint z;
        for (std::size_t j = 0; j < dim; ++j) z.coords.push_back(rng.uniform(-2.0, 2.0));
        data.append(z, rng.uniform(-1.0, 1.0));
    }
    return data;
}

} // namespace

TEST_CASE("kernel_eval matches closed forms") {
    const KernelSpec se = unit_se(2);
    CHECK(kernel_eval(se, TestPoint{0.3, -0.1}, TestPoint{0.3, -0.1}) == doctest::Approx(1.0));

    const KernelSpec se1 = unit_se(1);
    CHECK(kernel_eval(se1, TestPoint{0.0}, TestPoint{1.0}) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(std::exp(-0.5) == doctest::Approx(0.60653065971263342).epsilon(1e-15));

    CHECK(kernel_eval(se1, TestPoint{0.2}, TestPoint{-0.7}) ==
          kernel_eval(se1, TestPoint{-0.7}, TestPoint{0.2}));

    KernelSpec m52 = se1;
    m52.family = KernelFamily::Matern52;
    CHECK(kernel_eval(m52, TestPoint{0.4}, TestPoint{0.4}) == doctest::Approx(1.0));
    CHECK(kernel_eval(m52, TestPoint{0.0}, TestPoint{1.3}) ==
          kernel_eval(m52, TestPoint{1.3}, TestPoint{0.0}));

    CHECK_THROWS_AS(kernel_eval(se1, TestPoint{0.0, 1.0}, TestPoint{0.0, 1.0}), DimensionError);
    CHECK_THROWS_AS(kernel_eval(se1, TestPoint{0.0}, TestPoint{0.0, 1.0}), DimensionError);
}

TEST_CASE("kernel family names round-trip") {
    CHECK(kernel_family_from_string("squared_exponential") == KernelFamily::SquaredExponential);
    CHECK(kernel_family_from_string("matern52") == KernelFamily::Matern52);
    CHECK(kernel_family_from_string(to_string(KernelFamily::Matern52)) == KernelFamily::Matern52);
    CHECK_THROWS_AS(kernel_family_from_string("cubic"), ParameterError);
}

TEST_CASE("gram matrices are positive semi-definite") {
    SeededRng rng(11, 0);
    for (const KernelFamily family :
         {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + std::size_t(rng.uniform01() * 18.0);
            const std::size_t dim = 1 + std::size_t(rng.uniform01() * 2.0);
            KernelSpec k;
            k.family = family;
            for (std::size_t j = 0; j < dim; ++j)
                k.lengthscales.push_back(rng.uniform(0.2, 2.0));
            k.signal_variance = rng.uniform(0.1, 2.0);

            std::vector<TestPoint> pts(n);
            for (auto& p : pts)
                for (std::size_t j = 0; j < dim; ++j) p.coords.push_back(rng.uniform(-3.0, 3.0));

            Eigen::MatrixXd K(n, n);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) K(a, b) = kernel_eval(k, pts[a], pts[b]);
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
        }
    }
}

TEST_CASE("single noiseless point interpolates") {
    Dataset data;
    data.append(TestPoint{0.7}, 2.5);
    const GPModel m = fit(data, unit_se(), 0.0);
    CHECK(m.posterior_mean(TestPoint{0.7}) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(m.posterior_std(TestPoint{0.7}) <= 1e-4);
}

TEST_CASE("posterior mean matches the symmetric two-point hand solve") {
    // Dataset {((0),1), ((1),-1)}, unit SE, lambda = 0.1. By symmetry the
    // weight vector is (a, -a) with a = 1/(1.1 - exp(-1/2)), so the mean at
    // any z is a * (k(z,0) - k(z,1)).
    Dataset data;
    data.append(TestPoint{0.0}, 1.0);
    data.append(TestPoint{1.0}, -1.0);
    const GPModel m = fit(data, unit_se(), 0.1);
    const double a = 1.0 / (1.1 - std::exp(-0.5));

    CHECK(m.posterior_mean(TestPoint{0.5}) == doctest::Approx(0.0).epsilon(1e-10));
    const double hand_quarter = a * (std::exp(-0.5 * 0.0625) - std::exp(-0.5 * 0.5625));
    CHECK(m.posterior_mean(TestPoint{0.25}) == doctest::Approx(hand_quarter).epsilon(1e-9));
}

TEST_CASE("posterior mean is linear in the observations") {
    SeededRng rng(5, 0);
    const Dataset data = random_dataset(6, 1, rng);
    Dataset zero = data;
    for (double& y : zero.observations) y = 0.0;
    Dataset scaled = data;
    for (double& y : scaled.observations) y *= -3.0;

    const GPModel m = fit(data, unit_se(), 0.05);
    const GPModel mz = fit(zero, unit_se(), 0.05);
    const GPModel ms = fit(scaled, unit_se(), 0.05);
    for (double z = -2.0; z <= 2.0; z += 0.37) {
        CHECK(mz.posterior_mean(TestPoint{z}) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(ms.posterior_mean(TestPoint{z}) ==
              doctest::Approx(-3.0 * m.posterior_mean(TestPoint{z})).epsilon(1e-9));
    }
}

TEST_CASE("posterior reverts to the prior far from data") {
    SeededRng rng(6, 0);
    KernelSpec k = unit_se();
    k.signal_variance = 0.49;
    Dataset data = random_dataset(5, 1, rng);
    const GPModel m = fit(data, k, 0.01);
    CHECK(m.posterior_std(TestPoint{250.0}) == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(m.posterior_mean(TestPoint{250.0}) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("interpolation property with zero lambda") {
    SeededRng rng(7, 0);
    const Dataset data = random_dataset(8, 2, rng);
    const GPModel m = fit(data, unit_se(2), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(std::abs(m.posterior_mean(data.points[i]) - data.observations[i]) <= 1e-4);
        CHECK(m.posterior_std(data.points[i]) <= 1e-4);
    }
}

TEST_CASE("variance stays within [0, prior] and shrinks with data") {
    SeededRng rng(8, 0);
    KernelSpec k = unit_se();
    k.signal_variance = 1.7;
    Dataset data = random_dataset(4, 1, rng);
    const GPModel small = fit(data, k, 0.02);

    Dataset more = data;
    more.append(TestPoint{0.33}, 0.1);
    more.append(TestPoint{-1.4}, -0.2);
    const GPModel big = fit(more, k, 0.02);

    for (double z = -2.0; z <= 2.0; z += 0.11) {
        const double s = small.posterior_std(TestPoint{z});
        CHECK(s * s >= 0.0);
        CHECK(s * s <= k.signal_variance + 1e-9);
        CHECK(big.posterior_std(TestPoint{z}) <= s + 1e-9);
    }
}

TEST_CASE("posterior agrees with the independent dense solve") {
    SeededRng rng(9, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t dim = 1 + trial % 2;
        KernelSpec k;
        k.family = trial % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
        for (std::size_t j = 0; j < dim; ++j) k.lengthscales.push_back(rng.uniform(0.3, 1.5));
        k.signal_variance = rng.uniform(0.2, 2.0);
        const double lambda = rng.uniform(0.001, 0.2);
        Dataset data = random_dataset(5 + trial, dim, rng);

        const GPModel m = fit(data, k, lambda);
        for (int q = 0; q < 10; ++q) {
            TestPoint z;
            for (std::size_t j = 0; j < dim; ++j) z.coords.push_back(rng.uniform(-2.0, 2.0));
            const auto ref = oracles::dense_gp_solve(data, k, lambda, z);
            const auto [mean, std_dev] = m.posterior(z);
            CHECK(mean == doctest::Approx(ref.mean).epsilon(1e-8));
            CHECK(std_dev * std_dev == doctest::Approx(ref.variance).epsilon(1e-8));
        }
    }
}

TEST_CASE("log_det_scaled matches hand determinants") {
    Dataset one;
    one.append(TestPoint{0.0}, 0.5);
    const GPModel m1 = fit(one, unit_se(), 0.0);
    CHECK(log_det_scaled(m1, 2.0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(std::log(4.0) == doctest::Approx(1.3862943611198906).epsilon(1e-15));

    Dataset twin;
    twin.append(TestPoint{0.4}, 1.0);
    twin.append(TestPoint{0.4}, 1.0);
    const GPModel m2 = fit(twin, unit_se(), 0.0);
    CHECK(log_det_scaled(m2, 0.0) == doctest::Approx(std::log(3.0)).epsilon(1e-9));

    KernelSpec tiny = unit_se();
    tiny.signal_variance = 1e-12;
    SeededRng rng(10, 0);
    const Dataset data = random_dataset(4, 1, rng);
    const GPModel m3 = fit(data, tiny, 0.0);
    CHECK(log_det_scaled(m3, 0.0) == doctest::Approx(0.0).epsilon(1e-9));

    const std::size_t n = data.size();
    CHECK(log_det_scaled(fit(data, unit_se(), 0.0), 0.5) >= double(n) * std::log(1.5) - 1e-12);
}

TEST_CASE("mutual information diagnostic") {
    NoiseModel noise;
    noise.lambda = 1.0;
    noise.nu = 1.0;

    CHECK(mutual_information(Dataset{}, unit_se(), noise) == 0.0);

    Dataset one;
    one.append(TestPoint{0.0}, 0.3);
    CHECK(mutual_information(one, unit_se(), noise) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(0.5 * std::log(2.0) == doctest::Approx(0.34657359027997264).epsilon(1e-15));

    Dataset two = one;
    two.append(TestPoint{0.0}, 0.3);
    CHECK(mutual_information(two, unit_se(), noise) >=
          mutual_information(one, unit_se(), noise) - 1e-12);

    NoiseModel zero;
    zero.lambda = 0.0;
    CHECK_THROWS_AS(mutual_information(one, unit_se(), zero), ParameterError);
}

TEST_CASE("fit validates inputs") {
    CHECK_THROWS_AS(fit(Dataset{}, unit_se(), 0.1), ParameterError);
    Dataset data;
    data.append(TestPoint{0.0, 1.0}, 0.5);
    CHECK_THROWS_AS(fit(data, unit_se(1), 0.1), DimensionError);
    data = Dataset{};
    data.append(TestPoint{0.0}, 0.5);
    CHECK_THROWS_AS(fit(data, unit_se(), -0.1), ParameterError);

    KernelSpec bad = unit_se();
    bad.lengthscales[0] = 0.0;
    CHECK_THROWS_AS(fit(data, bad, 0.1), ParameterError);
    bad = unit_se();
    bad.signal_variance = -1.0;
    CHECK_THROWS_AS(fit(data, bad, 0.1), ParameterError);
}
