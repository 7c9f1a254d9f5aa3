// Microbenchmarks for the hot paths: GP fitting, posterior queries, the UCB
// acquisition search, and builtin system rollouts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "simbound/bo.hpp"
#include "simbound/gp.hpp"
#include "simbound/robustness.hpp"
#include "simbound/systems.hpp"

namespace {

using namespace simbound;

KernelSpec se_kernel(std::size_t dim) {
    KernelSpec k;
    k.family = KernelFamily::SquaredExponential;
    k.lengthscales.assign(dim, 0.3);
    k.signal_variance = 1.0;
    return k;
}

Dataset random_dataset(std::size_t n, std::size_t dim, SeededRng& rng) {
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
        TestPoint z;
        for (std::size_t c = 0; c < dim; ++c) z.coords.push_back(rng.uniform(0.0, 1.0));
        data.append(std::move(z), rng.normal(0.0, 1.0));
    }
    return data;
}

void BM_GpFit(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    SeededRng rng(1, 0);
    const Dataset data = random_dataset(n, 2, rng);
    const KernelSpec k = se_kernel(2);
    for (auto _ : state) {
        GPModel m = fit(data, k, 1e-4);
        benchmark::DoNotOptimize(m);
    }
    state.SetComplexityN(int64_t(n));
}
BENCHMARK(BM_GpFit)->Arg(16)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_GpPosterior(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    SeededRng rng(2, 0);
    const Dataset data = random_dataset(n, 2, rng);
    const KernelSpec k = se_kernel(2);
    const GPModel m = fit(data, k, 1e-4);
    const TestPoint z{0.4, 0.6};
    for (auto _ : state) {
        auto res = m.posterior(z);
        benchmark::DoNotOptimize(res);
    }
    state.SetComplexityN(int64_t(n));
}
BENCHMARK(BM_GpPosterior)->Arg(16)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_UcbSearch(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    SeededRng rng(3, 0);
    const Dataset data = random_dataset(n, 2, rng);
    const KernelSpec k = se_kernel(2);
    const GPModel m = fit(data, k, 1e-4);
    const TestDomain domain({0.0, 0.0}, {1.0, 1.0});
    for (auto _ : state) {
        SeededRng search(4, 0);
        TestPoint z = maximize_ucb(m, 2.0, domain, 8, search);
        benchmark::DoNotOptimize(z);
    }
}
BENCHMARK(BM_UcbSearch)->Arg(16)->Arg(64)->Arg(128);

void BM_VelocityRollout(benchmark::State& state) {
    VelocityTrackerParams p;
    p.tau = 0.2;
    p.noise_std = 0.01;
    const VelocityTrackerAdapter sys(SystemSide::Simulator, 1.5, 0.01, p);
    const TestPoint d{0.3};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Signal s = sys.rollout(d, SeededRng(seed++, 0));
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_VelocityRollout);

void BM_TurtlebotRollout(benchmark::State& state) {
    TurtlebotParams p;
    const TurtlebotAdapter sys(SystemSide::Simulator, 5.0, 0.01, p, 2);
    const TestPoint d{0.1, -0.1};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Signal s = sys.rollout(d, SeededRng(seed++, 0));
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_TurtlebotRollout);

void BM_MeasureEval(benchmark::State& state) {
    VelocitySpec vs;
    vs.v_d = 0.3;
    vs.delta_o = 0.1;
    vs.delta_s = 0.05;
    const Measure m = Measure::velocity(vs);

    std::vector<std::vector<double>> samples;
    for (int i = 0; i <= 150; ++i) samples.push_back({0.3 * (1.0 - std::exp(-0.01 * i * 6.0))});
    const Signal s(0.0, 0.01, samples);
    for (auto _ : state) {
        double rho = eval(m, s);
        benchmark::DoNotOptimize(rho);
    }
}
BENCHMARK(BM_MeasureEval);

} // namespace

BENCHMARK_MAIN();
