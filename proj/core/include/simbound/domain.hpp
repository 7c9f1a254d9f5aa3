#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "simbound/errors.hpp"

namespace simbound {

/// A point in the feasible test space (or in a generic optimization domain).
struct TestPoint {
    std::vector<double> coords;

    TestPoint() = default;
    explicit TestPoint(std::vector<double> c) : coords(std::move(c)) {}
    TestPoint(std::initializer_list<double> c) : coords(c) {}

    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }

    bool operator==(const TestPoint& other) const { return coords == other.coords; }
};

/// Compact axis-aligned box of admissible test parameters.
struct TestDomain {
    std::vector<double> lower;
    std::vector<double> upper;

    TestDomain() = default;
    TestDomain(std::vector<double> lo, std::vector<double> hi);

    std::size_t dim() const { return lower.size(); }
    double width(std::size_t i) const { return upper[i] - lower[i]; }
    TestPoint center() const;
};

/// True iff p lies inside the closed box (boundary inclusive).
bool contains(const TestDomain& domain, const TestPoint& p);

/// Componentwise projection of p onto the box. Idempotent.
TestPoint clamp(const TestDomain& domain, const TestPoint& p);

/// Uniformly sampled, time-stamped state trajectory. All samples share one
/// state dimension; time stamps are t0 + i*dt.
struct Signal {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::vector<double>> samples;

    Signal() = default;
    Signal(double t0_, double dt_, std::vector<std::vector<double>> samples_);

    std::size_t size() const { return samples.size(); }
    std::size_t state_dim() const { return samples.empty() ? 0 : samples.front().size(); }
    double duration() const { return samples.empty() ? 0.0 : dt * double(samples.size() - 1); }
    double t_end() const { return t0 + duration(); }
};

/// State at time t by linear interpolation between the bracketing samples.
/// Exact at sample instants. Throws HorizonError outside [t0, t_end].
std::vector<double> sample_at(const Signal& signal, double t);

/// Scalar coordinate variant of sample_at.
double sample_coord_at(const Signal& signal, double t, std::size_t coord);

/// Splittable, replayable random source. A (seed, stream) pair fully
/// determines the draw sequence; distinct streams are statistically
/// independent. Uniform and normal variates are derived from the raw 64-bit
/// engine output with fixed arithmetic, so sequences do not depend on the
/// standard library's distribution implementations.
class SeededRng {
public:
    SeededRng() : SeededRng(0, 0) {}
    SeededRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Child rng on an independent stream. derive(k) is a pure function of
    /// (seed, stream, k): the same call on an equal rng gives an equal child
    /// regardless of how many draws either has made.
    SeededRng derive(std::uint64_t k) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01();

    double uniform(double lo, double hi);

    /// Standard Box-Muller normal; consumes exactly two uniforms per draw.
    double normal(double mean = 0.0, double stddev = 1.0);

    /// Uniform point in a box.
    TestPoint uniform_in(const TestDomain& domain);

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::mt19937_64 engine_;
};

} // namespace simbound
