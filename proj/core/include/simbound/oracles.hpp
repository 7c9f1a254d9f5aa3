#pragma once

#include <functional>
#include <utility>

#include "simbound/domain.hpp"
#include "simbound/gp.hpp"

namespace simbound {
namespace oracles {

/// Uniform evaluation grid over a box, with a hard budget on total size.
struct GridSpec {
    std::size_t points_per_dim = 2;
    TestDomain domain;
    std::size_t budget = 1u << 22;

    std::size_t total_points() const;
};

enum class OptMode { Min, Max };

/// Grid point at a flat row-major index (last dimension fastest), matching
/// the visit order of grid_optimum. Index must be below total_points().
TestPoint grid_point(const GridSpec& grid, std::size_t flat_index);

struct GridOptimum {
    TestPoint argopt;
    double value = 0.0;
};

/// Exhaustive evaluation of `objective` on the grid. Ties broken by the
/// lexicographically smallest point. Deterministic.
GridOptimum grid_optimum(const std::function<double(const TestPoint&)>& objective,
                         const GridSpec& grid, OptMode mode);

struct McEstimate {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::size_t count = 0;
};

/// Sample mean and standard error of M draws from `sampler`.
McEstimate mc_expectation(const std::function<double(SeededRng&)>& sampler, std::size_t M,
                          SeededRng rng);

struct DenseGpResult {
    double mean = 0.0;
    double variance = 0.0;
};

/// Reference posterior evaluation by direct dense solve. Deliberately shares
/// no linear-algebra or kernel code with the gp module so that agreement is
/// evidence, not tautology. Throws NumericalError on a singular system.
DenseGpResult dense_gp_solve(const Dataset& data, const KernelSpec& k, double lambda,
                             const TestPoint& z);

} // namespace oracles
} // namespace simbound
