#include "simbound/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace simbound {

namespace {

void check_dims(const TestDomain& domain, const TestPoint& p) {
    if (p.dim() != domain.dim()) {
        throw DimensionError("test point has dimension " + std::to_string(p.dim()) +
                             ", domain has dimension " + std::to_string(domain.dim()));
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

TestDomain::TestDomain(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
        throw DimensionError("domain bounds differ in length");
    }
    if (lower.empty()) {
        throw ParameterError("domain must have at least one dimension");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) {
            throw ParameterError("domain is degenerate in dimension " + std::to_string(i));
        }
    }
}

TestPoint TestDomain::center() const {
    TestPoint p;
    p.coords.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        p.coords[i] = 0.5 * (lower[i] + upper[i]);
    }
    return p;
}

bool contains(const TestDomain& domain, const TestPoint& p) {
    check_dims(domain, p);
    for (std::size_t i = 0; i < domain.dim(); ++i) {
        if (p.coords[i] < domain.lower[i] || p.coords[i] > domain.upper[i]) {
            return false;
        }
    }
    return true;
}

TestPoint clamp(const TestDomain& domain, const TestPoint& p) {
    check_dims(domain, p);
    TestPoint q = p;
    for (std::size_t i = 0; i < domain.dim(); ++i) {
        q.coords[i] = std::min(domain.upper[i], std::max(domain.lower[i], q.coords[i]));
    }
    return q;
}

Signal::Signal(double t0_, double dt_, std::vector<std::vector<double>> samples_)
    : t0(t0_), dt(dt_), samples(std::move(samples_)) {
    if (dt <= 0.0) {
        throw ParameterError("signal dt must be positive");
    }
    for (const auto& s : samples) {
        if (s.size() != samples.front().size()) {
            throw DimensionError("signal samples differ in state dimension");
        }
    }
}

std::vector<double> sample_at(const Signal& signal, double t) {
    if (signal.samples.empty()) {
        throw HorizonError("signal is empty");
    }
    const double rel = (t - signal.t0) / signal.dt;
    const double last = double(signal.samples.size() - 1);
    // Small slack absorbs roundoff at window endpoints.
    const double tol = 1e-9;
    if (rel < -tol || rel > last + tol) {
        throw HorizonError("time " + std::to_string(t) + " outside signal horizon [" +
                           std::to_string(signal.t0) + ", " + std::to_string(signal.t_end()) + "]");
    }
    const double r = std::clamp(rel, 0.0, last);
    const std::size_t i = std::min<std::size_t>(std::size_t(r), signal.samples.size() - 1);
    const double frac = r - double(i);
    if (frac == 0.0 || i + 1 >= signal.samples.size()) {
        return signal.samples[i];
    }
    const auto& a = signal.samples[i];
    const auto& b = signal.samples[i + 1];
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        out[j] = a[j] + frac * (b[j] - a[j]);
    }
    return out;
}

double sample_coord_at(const Signal& signal, double t, std::size_t coord) {
    if (coord >= signal.state_dim()) {
        throw DimensionError("state coordinate " + std::to_string(coord) +
                             " out of range for state dimension " +
                             std::to_string(signal.state_dim()));
    }
    return sample_at(signal, t)[coord];
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    // seed_seq is fully specified by the standard, so this is reproducible
    // across implementations.
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32)};
    engine_.seed(seq);
}

SeededRng SeededRng::derive(std::uint64_t k) const {
    return SeededRng(seed_, splitmix64(stream_ + 0x9E3779B97F4A7C15ULL * (k + 1)));
}

std::uint64_t SeededRng::next_u64() {
    return engine_();
}

double SeededRng::uniform01() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double SeededRng::normal(double mean, double stddev) {
    double u1 = uniform01();
    while (u1 <= 0.0) {  // log(0) guard
        u1 = uniform01();
    }
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

TestPoint SeededRng::uniform_in(const TestDomain& domain) {
    TestPoint p;
    p.coords.resize(domain.dim());
    for (std::size_t i = 0; i < domain.dim(); ++i) {
        p.coords[i] = uniform(domain.lower[i], domain.upper[i]);
    }
    return p;
}

} // namespace simbound
