#pragma once

#include <functional>
#include <vector>

#include "simbound/domain.hpp"
#include "simbound/gp.hpp"

namespace simbound {

/// Parameters of the certified GP-UCB optimizer.
struct BoParams {
    double B = 1.0;        // RKHS norm bound on the objective
    double R = 0.1;        // sub-Gaussian noise proxy of the observations
    double delta = 0.05;   // confidence parameter, in (0, 1]
    double epsilon = 0.05; // termination tolerance on the simple-regret bound
    std::size_t max_iters = 500;
    std::size_t acquisition_restarts = 8;
    double lambda = 1e-6;  // GP regularizer

    void validate() const;
};

/// One optimizer iteration: the acquisition choice z, its noisy observation
/// y, the confidence scale beta, and the simple-regret bound F.
struct IterationRecord {
    TestPoint z;
    double y = 0.0;
    double beta = 0.0;
    double F = 0.0;
};

enum class BoundDirection {
    UpperMax, // bound is an upper bound on max J
    LowerMin, // bound is a lower bound on min J
};

/// Probabilistic bound certificate: with probability >= 1-delta the bound
/// holds and is within epsilon of the true optimum.
struct BoundCertificate {
    double bound = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    std::size_t iterations = 0;
    TestPoint argbest;
    std::vector<IterationRecord> trace;
    Dataset final_dataset;
    BoundDirection direction = BoundDirection::UpperMax;
    BoParams params;
    KernelSpec kernel;
};

/// Black-box objective with a replayable noisy sampler.
struct Objective {
    std::function<double(const TestPoint&, SeededRng&)> sampler;
    TestDomain domain;
};

/// Optimizer exceeded max_iters before the simple-regret bound fell below
/// epsilon. Carries the partial trace and dataset.
struct UnterminatedError : Error {
    UnterminatedError(std::vector<IterationRecord> trace_, Dataset dataset_)
        : Error("optimizer hit max_iters before the regret bound reached epsilon"),
          trace(std::move(trace_)), dataset(std::move(dataset_)) {}

    std::vector<IterationRecord> trace;
    Dataset dataset;
};

/// Confidence scale
///   beta_i = B + R * sqrt(2 * ln(sqrt(det((1+2/i) I + K_i)) / delta)),
/// computed through the log-determinant. The model must be fit on exactly
/// the i points sampled so far. Always >= B for delta <= 1.
double beta(std::size_t i, const GPModel& model, const BoParams& p);

/// Maximizer of the acquisition mu(z) + beta * sigma(z) over the box, by
/// Latin-grid seeding plus coordinate descent with shrinking steps. Returns
/// the best point found over every seed and refinement iterate; exact ties
/// go to the lexicographically smallest point. Deterministic given rng.
TestPoint maximize_ucb(const GPModel& model, double beta, const TestDomain& domain,
                       std::size_t restarts, SeededRng rng);

/// One-sample initial dataset at the domain center.
Dataset initial_dataset(const Objective& obj, SeededRng rng);

/// Runs the optimizer until 2 beta_i sigma_{i-1}(z_i) <= epsilon and returns
/// an upper-bound certificate on max J. Throws UnterminatedError past
/// max_iters.
BoundCertificate run(const Objective& obj, const BoParams& p, const KernelSpec& k,
                     const Dataset& init, SeededRng rng);

/// Lower bound on min J by negation: min J = -max(-J). The returned trace
/// and dataset hold un-negated observations.
BoundCertificate lower_bound_min(const Objective& obj, const BoParams& p, const KernelSpec& k,
                                 const Dataset& init, SeededRng rng);

} // namespace simbound
