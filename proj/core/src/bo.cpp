#include "simbound/bo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simbound {

void BoParams::validate() const {
    if (!(B > 0.0) || !std::isfinite(B)) throw ParameterError("B must be positive and finite");
    if (!(R > 0.0) || !std::isfinite(R)) throw ParameterError("R must be positive and finite");
    if (!(delta > 0.0) || delta > 1.0) throw ParameterError("delta must lie in (0, 1]");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be positive and finite");
    if (max_iters == 0) throw ParameterError("max_iters must be positive");
    if (acquisition_restarts == 0) throw ParameterError("acquisition_restarts must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive and finite");
}

double beta(std::size_t i, const GPModel& model, const BoParams& p) {
    if (i == 0) throw ParameterError("beta is defined for iterations i >= 1");
    if (model.size() != i)
        throw ParameterError("beta expects the model fit on exactly the i points sampled so far");
    if (!(p.delta > 0.0) || p.delta > 1.0) throw ParameterError("delta must lie in (0, 1]");
    const double eta = 2.0 / static_cast<double>(i);
    const double half_log_det = 0.5 * log_det_scaled(model, eta);
    const double arg = 2.0 * (half_log_det - std::log(p.delta));
    if (arg < 0.0)
        throw NumericalError("negative argument under the square root in beta");
    return p.B + p.R * std::sqrt(arg);
}

namespace {

bool lex_less(const TestPoint& a, const TestPoint& b) {
    return std::lexicographical_compare(a.coords.begin(), a.coords.end(),
                                        b.coords.begin(), b.coords.end());
}

class BestTracker {
public:
    void consider(const TestPoint& z, double value) {
        if (!has_ || value > value_ || (value == value_ && lex_less(z, point_))) {
            has_ = true;
            value_ = value;
            point_ = z;
        }
    }
    const TestPoint& point() const { return point_; }
    bool valid() const { return has_; }

private:
    bool has_ = false;
    double value_ = 0.0;
    TestPoint point_;
};

} // namespace

TestPoint maximize_ucb(const GPModel& model, double beta, const TestDomain& domain,
                       std::size_t restarts, SeededRng rng) {
    if (restarts == 0) throw ParameterError("restarts must be positive");
    if (!std::isfinite(beta) || beta < 0.0) throw ParameterError("beta must be finite and non-negative");
    const std::size_t dim = domain.dim();

    const auto ucb = [&](const TestPoint& z) {
        const auto [mean, std] = model.posterior(z);
        return mean + beta * std;
    };

    // Latin-grid seeds: one stratum index per restart in each dimension,
    // shuffled independently per dimension so the seeds cover the box.
    std::vector<std::vector<std::size_t>> strata(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        strata[j].resize(restarts);
        std::iota(strata[j].begin(), strata[j].end(), std::size_t{0});
        for (std::size_t s = restarts; s > 1; --s) {
            const std::size_t r = static_cast<std::size_t>(
                rng.uniform01() * static_cast<double>(s));
            std::swap(strata[j][s - 1], strata[j][std::min(r, s - 1)]);
        }
    }

    BestTracker best;
    const double shrink_floor = 1e-6;
    for (std::size_t s = 0; s < restarts; ++s) {
        TestPoint x;
        x.coords.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const double frac =
                (static_cast<double>(strata[j][s]) + 0.5) / static_cast<double>(restarts);
            x.coords[j] = domain.lower[j] + frac * domain.width(j);
        }
        double fx = ucb(x);
        best.consider(x, fx);

        double scale = 0.1; // step size as a fraction of the box width per axis
        while (scale > shrink_floor) {
            bool improved = false;
            for (std::size_t j = 0; j < dim; ++j) {
                const double step = scale * domain.width(j);
                for (const double dir : {1.0, -1.0}) {
                    TestPoint y = x;
                    y.coords[j] = std::clamp(y.coords[j] + dir * step,
                                             domain.lower[j], domain.upper[j]);
                    if (y.coords[j] == x.coords[j]) continue;
                    const double fy = ucb(y);
                    best.consider(y, fy);
                    if (fy > fx) {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            if (!improved) scale *= 0.5;
        }
    }
    return best.point();
}

Dataset initial_dataset(const Objective& obj, SeededRng rng) {
    if (!obj.sampler) throw ParameterError("objective has no sampler");
    TestPoint center = obj.domain.center();
    SeededRng draw = rng.derive(0);
    Dataset data;
    data.append(center, obj.sampler(center, draw));
    return data;
}

BoundCertificate run(const Objective& obj, const BoParams& p, const KernelSpec& k,
                     const Dataset& init, SeededRng rng) {
    p.validate();
    k.validate();
    if (!obj.sampler) throw ParameterError("objective has no sampler");
    if (init.size() == 0) throw ParameterError("initial dataset must hold at least one point");
    init.validate();
    for (const TestPoint& z : init.points)
        if (!contains(obj.domain, z)) throw DomainError("initial dataset point outside the domain");

    Dataset data = init;
    std::vector<IterationRecord> trace;
    for (std::size_t i = 1; i <= p.max_iters; ++i) {
        const GPModel model = fit(data, k, p.lambda);
        const double b = beta(data.size(), model, p);

        SeededRng acq_rng = rng.derive(2 * i);
        const TestPoint z = maximize_ucb(model, b, obj.domain, p.acquisition_restarts, acq_rng);
        const auto [mean, std] = model.posterior(z);
        const double F = 2.0 * b * std;

        SeededRng obs_rng = rng.derive(2 * i + 1);
        const double y = obj.sampler(z, obs_rng);
        if (!std::isfinite(y)) throw NumericalError("objective returned a non-finite observation");
        data.append(z, y);
        trace.push_back(IterationRecord{z, y, b, F});

        if (F <= p.epsilon) {
            BoundCertificate cert;
            cert.bound = mean + b * std;
            cert.epsilon = p.epsilon;
            cert.delta = p.delta;
            cert.iterations = i;
            cert.argbest = z;
            cert.trace = std::move(trace);
            cert.final_dataset = std::move(data);
            cert.direction = BoundDirection::UpperMax;
            cert.params = p;
            cert.kernel = k;
            return cert;
        }
    }
    throw UnterminatedError(std::move(trace), std::move(data));
}

BoundCertificate lower_bound_min(const Objective& obj, const BoParams& p, const KernelSpec& k,
                                 const Dataset& init, SeededRng rng) {
    if (!obj.sampler) throw ParameterError("objective has no sampler");
    Objective negated;
    negated.domain = obj.domain;
    negated.sampler = [sampler = obj.sampler](const TestPoint& z, SeededRng& r) {
        return -sampler(z, r);
    };
    Dataset neg_init = init;
    for (double& y : neg_init.observations) y = -y;

    BoundCertificate cert = run(negated, p, k, neg_init, rng);
    cert.bound = -cert.bound;
    for (IterationRecord& rec : cert.trace) rec.y = -rec.y;
    for (double& y : cert.final_dataset.observations) y = -y;
    cert.direction = BoundDirection::LowerMin;
    return cert;
}

} // namespace simbound
