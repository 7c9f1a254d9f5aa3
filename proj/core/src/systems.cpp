#include "simbound/systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace simbound {

std::string to_string(SystemSide side) {
    return side == SystemSide::TrueSystem ? "true-system" : "simulator";
}

std::string to_string(SystemKind kind) {
    switch (kind) {
    case SystemKind::VelocityTracker: return "velocity_tracker";
    case SystemKind::Turtlebot: return "turtlebot";
    case SystemKind::Subprocess: return "subprocess";
    }
    return "unknown";
}

SystemAdapter::SystemAdapter(SystemKind kind, SystemSide side, double horizon, double dt)
    : kind_(kind), side_(side), horizon_(horizon), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive and finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be positive and finite");
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio))
        throw ParameterError("horizon must be a positive integer multiple of dt");
    steps_ = static_cast<std::size_t>(rounded);
}

void SystemAdapter::check_test_point(const TestPoint& d) const {
    if (d.dim() != d_dim()) throw DimensionError("test point dimension mismatch");
    for (double c : d.coords)
        if (!std::isfinite(c)) throw DomainError("test point must be finite");
    if (domain_ && !contains(*domain_, d))
        throw DomainError("test point outside the feasible domain");
}

void VelocityTrackerParams::validate() const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be >= 0 and finite");
    if (!(rate_limit >= 0.0) || !std::isfinite(rate_limit))
        throw ParameterError("rate_limit must be >= 0 and finite");
    if (!(omega >= 0.0) || !std::isfinite(omega))
        throw ParameterError("omega must be >= 0 and finite");
    if (omega > 0.0 && rate_limit > 0.0)
        throw ParameterError("rate_limit applies to the first-order plant only");
    if (omega > 0.0 && !(zeta > 0.0))
        throw ParameterError("zeta must be positive for the second-order plant");
    if (!std::isfinite(zeta)) throw ParameterError("zeta must be finite");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw ParameterError("noise_std must be >= 0 and finite");
    if (!(bias_const >= 0.0) || !std::isfinite(bias_const))
        throw ParameterError("bias_const must be >= 0 and finite");
    if (!(bias_abs_gain >= 0.0) || !std::isfinite(bias_abs_gain))
        throw ParameterError("bias_abs_gain must be >= 0 and finite");
    if (!std::isfinite(v0)) throw ParameterError("v0 must be finite");
    if (omega == 0.0 && tau == 0.0 && rate_limit > 0.0)
        throw ParameterError("rate_limit is meaningless with instant tracking");
}

VelocityTrackerAdapter::VelocityTrackerAdapter(SystemSide side, double horizon, double dt,
                                               VelocityTrackerParams params)
    : SystemAdapter(SystemKind::VelocityTracker, side, horizon, dt), params_(params) {
    params_.validate();
}

namespace {

constexpr int kSubsteps = 10; // RK4 substeps per emitted sample interval

// Classic RK4 over one substep for a state vector of compile-time size N.
template <std::size_t N, typename Deriv>
void rk4_step(std::array<double, N>& x, double h, Deriv&& f) {
    std::array<double, N> k1, k2, k3, k4, tmp;
    f(x, k1);
    for (std::size_t j = 0; j < N; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
    f(tmp, k2);
    for (std::size_t j = 0; j < N; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
    f(tmp, k3);
    for (std::size_t j = 0; j < N; ++j) tmp[j] = x[j] + h * k3[j];
    f(tmp, k4);
    for (std::size_t j = 0; j < N; ++j)
        x[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
}

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

} // namespace

Signal VelocityTrackerAdapter::rollout(const TestPoint& d, SeededRng rng) const {
    check_test_point(d);
    const double v_cmd = d[0];
    const double bias = params_.bias_const + params_.bias_abs_gain * std::fabs(v_cmd);
    const double toward_zero = v_cmd >= 0.0 ? -bias : bias;
    double target = v_cmd + toward_zero;
    if (params_.noise_std > 0.0) target += rng.normal(0.0, params_.noise_std);

    std::vector<std::vector<double>> samples;
    samples.reserve(steps() + 1);
    const double h = dt() / kSubsteps;

    if (params_.omega > 0.0) {
        std::array<double, 2> x{params_.v0, 0.0}; // velocity and its rate
        const auto deriv = [&](const std::array<double, 2>& s, std::array<double, 2>& out) {
            out[0] = s[1];
            out[1] = params_.omega * params_.omega * (target - s[0]) -
                     2.0 * params_.zeta * params_.omega * s[1];
        };
        samples.push_back({x[0], v_cmd});
        for (std::size_t i = 0; i < steps(); ++i) {
            for (int k = 0; k < kSubsteps; ++k) rk4_step(x, h, deriv);
            samples.push_back({x[0], v_cmd});
        }
    } else if (params_.tau == 0.0) {
        for (std::size_t i = 0; i <= steps(); ++i) samples.push_back({target, v_cmd});
    } else {
        std::array<double, 1> x{params_.v0};
        const auto deriv = [&](const std::array<double, 1>& s, std::array<double, 1>& out) {
            double rate = (target - s[0]) / params_.tau;
            if (params_.rate_limit > 0.0)
                rate = std::clamp(rate, -params_.rate_limit, params_.rate_limit);
            out[0] = rate;
        };
        samples.push_back({x[0], v_cmd});
        for (std::size_t i = 0; i < steps(); ++i) {
            for (int k = 0; k < kSubsteps; ++k) rk4_step(x, h, deriv);
            samples.push_back({x[0], v_cmd});
        }
    }
    return Signal(0.0, dt(), std::move(samples));
}

void TurtlebotParams::validate() const {
    for (double v : {x0, y0, goal_x, goal_y})
        if (!std::isfinite(v)) throw ParameterError("turtlebot positions must be finite");
    if (!(speed > 0.0) || !std::isfinite(speed))
        throw ParameterError("speed must be positive and finite");
    if (!(heading_gain > 0.0) || !std::isfinite(heading_gain))
        throw ParameterError("heading_gain must be positive and finite");
    if (!(heading_noise_std >= 0.0) || !std::isfinite(heading_noise_std))
        throw ParameterError("heading_noise_std must be >= 0 and finite");
    if (!(speed_scale > 0.0) || !std::isfinite(speed_scale))
        throw ParameterError("speed_scale must be positive and finite");
    if (!(park_radius > 0.0) || !std::isfinite(park_radius))
        throw ParameterError("park_radius must be positive and finite");
    const double dx = goal_x - x0;
    const double dy = goal_y - y0;
    if (dx * dx + dy * dy < 1e-12)
        throw ParameterError("start and goal must be distinct");
}

TurtlebotAdapter::TurtlebotAdapter(SystemSide side, double horizon, double dt,
                                   TurtlebotParams params, std::size_t test_dim)
    : SystemAdapter(SystemKind::Turtlebot, side, horizon, dt), params_(params),
      test_dim_(test_dim) {
    params_.validate();
    if (test_dim_ == 0) throw ParameterError("turtlebot needs a test dimension of at least 1");
}

Signal TurtlebotAdapter::rollout(const TestPoint& d, SeededRng rng) const {
    check_test_point(d);
    const double theta0 = std::atan2(params_.goal_y - params_.y0, params_.goal_x - params_.x0);
    std::array<double, 3> x{params_.x0, params_.y0, theta0};
    const double h = dt() / kSubsteps;

    const auto emit = [&](std::vector<std::vector<double>>& out) {
        std::vector<double> s{x[0], x[1]};
        if (params_.emit_test_point)
            s.insert(s.end(), d.coords.begin(), d.coords.end());
        out.push_back(std::move(s));
    };

    std::vector<std::vector<double>> samples;
    samples.reserve(steps() + 1);
    emit(samples);
    for (std::size_t i = 0; i < steps(); ++i) {
        // One disturbance draw per emitted step, held over the substeps.
        const double w = params_.heading_noise_std > 0.0
                             ? rng.normal(0.0, params_.heading_noise_std)
                             : 0.0;
        const auto deriv = [&](const std::array<double, 3>& s, std::array<double, 3>& out) {
            const double dx = params_.goal_x - s[0];
            const double dy = params_.goal_y - s[1];
            const double dist = std::sqrt(dx * dx + dy * dy);
            if (dist < 1e-9) {
                out = {0.0, 0.0, 0.0};
                return;
            }
            const double bearing = std::atan2(dy, dx);
            const double v = params_.speed * params_.speed_scale *
                             std::min(1.0, dist / params_.park_radius);
            out[0] = v * std::cos(s[2]);
            out[1] = v * std::sin(s[2]);
            out[2] = params_.heading_gain * wrap_angle(bearing - s[2]) + w;
        };
        for (int k = 0; k < kSubsteps; ++k) rk4_step(x, h, deriv);
        emit(samples);
    }
    return Signal(0.0, dt(), std::move(samples));
}

void SystemPair::validate() const {
    if (!true_sys || !sim_sys) throw ParameterError("system pair is missing a side");
    if (true_sys->side() != SystemSide::TrueSystem)
        throw ParameterError("true_sys must carry the true-system side tag");
    if (sim_sys->side() != SystemSide::Simulator)
        throw ParameterError("sim_sys must carry the simulator side tag");
    if (true_sys->d_dim() != sim_sys->d_dim())
        throw DimensionError("pair sides disagree on the test point dimension");
    if (true_sys->state_dim() != sim_sys->state_dim())
        throw DimensionError("pair sides disagree on the state dimension");
    if (domain.dim() != true_sys->d_dim())
        throw DimensionError("domain dimension does not match the pair");
}

namespace {

RolloutStats stats_of(const std::vector<double>& values) {
    RolloutStats st;
    st.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) {
            const double diff = v - st.mean;
            sq += diff * diff;
        }
        st.sample_variance = sq / static_cast<double>(values.size() - 1);
    }
    return st;
}

} // namespace

RolloutStats expected_robustness(const SystemAdapter& sys, const Measure& measure,
                                 const TestPoint& d, std::size_t M, SeededRng rng) {
    if (M == 0) throw ParameterError("M must be at least 1");
    std::vector<double> values;
    values.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        const Signal s = sys.rollout(d, rng.derive(i));
        values.push_back(eval(measure, s));
    }
    return stats_of(values);
}

RolloutStats expected_gap(const SystemPair& pair, const Measure& measure, const TestPoint& d,
                          std::size_t M, SeededRng rng) {
    if (M == 0) throw ParameterError("M must be at least 1");
    pair.validate();
    std::vector<double> values;
    values.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        const Signal s_true = pair.true_sys->rollout(d, rng.derive(2 * i));
        const Signal s_sim = pair.sim_sys->rollout(d, rng.derive(2 * i + 1));
        values.push_back(std::fabs(eval(measure, s_true) - eval(measure, s_sim)));
    }
    return stats_of(values);
}

} // namespace simbound
