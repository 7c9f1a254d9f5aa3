#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simbound/domain.hpp"
#include "simbound/robustness.hpp"

namespace simbound {

enum class SystemSide { TrueSystem, Simulator };
enum class SystemKind { VelocityTracker, Turtlebot, Subprocess };

std::string to_string(SystemSide side);
std::string to_string(SystemKind kind);

/// Seeded rollout generator for one side of a system pair. rollout is a
/// pure function of (d, seed, config): identical inputs give an identical
/// Signal. The horizon must be an integer multiple of dt.
class SystemAdapter {
public:
    virtual ~SystemAdapter() = default;
    SystemAdapter(const SystemAdapter&) = delete;
    SystemAdapter& operator=(const SystemAdapter&) = delete;

    SystemKind kind() const { return kind_; }
    SystemSide side() const { return side_; }
    double horizon() const { return horizon_; }
    double dt() const { return dt_; }
    /// Number of integration steps; emitted signals have steps()+1 samples.
    std::size_t steps() const { return steps_; }

    virtual std::size_t state_dim() const = 0;
    virtual std::size_t d_dim() const = 0;
    virtual Signal rollout(const TestPoint& d, SeededRng rng) const = 0;

    /// Optional feasible box; when set, rollout rejects test points outside
    /// it with DomainError.
    void set_domain(TestDomain domain) { domain_ = std::move(domain); }

protected:
    SystemAdapter(SystemKind kind, SystemSide side, double horizon, double dt);

    /// Dimension and domain checks shared by every rollout implementation.
    void check_test_point(const TestPoint& d) const;

private:
    SystemKind kind_;
    SystemSide side_;
    double horizon_;
    double dt_;
    std::size_t steps_;
    std::optional<TestDomain> domain_;
};

/// First-order velocity tracking plant (optionally second-order and
/// underdamped so the overshoot clause of the velocity requirement can
/// trigger). The test point is the commanded velocity. Each rollout draws
/// one disturbance offset w ~ N(0, noise_std^2) and tracks
///   target = v_cmd - sign(v_cmd) * (bias_const + bias_abs_gain*|v_cmd|) + w,
/// so the bias shifts tracking toward zero and the sim-vs-real gap of a
/// biased/unbiased pair is known in closed form. tau = 0 means instant
/// tracking. Emitted state: [v, v_cmd].
struct VelocityTrackerParams {
    double tau = 0.1;
    double rate_limit = 0.0; // max |dv/dt| when positive; 0 disables
    double omega = 0.0;      // > 0 selects the second-order plant
    double zeta = 0.7;       // second-order damping ratio
    double noise_std = 0.0;
    double bias_const = 0.0;
    double bias_abs_gain = 0.0;
    double v0 = 0.0;

    void validate() const;
};

class VelocityTrackerAdapter final : public SystemAdapter {
public:
    VelocityTrackerAdapter(SystemSide side, double horizon, double dt,
                           VelocityTrackerParams params);

    std::size_t state_dim() const override { return 2; }
    std::size_t d_dim() const override { return 1; }
    Signal rollout(const TestPoint& d, SeededRng rng) const override;

    const VelocityTrackerParams& params() const { return params_; }

private:
    VelocityTrackerParams params_;
};

/// Unicycle robot steering toward a fixed goal with a proportional heading
/// controller; the initial heading points at the goal, so the undisturbed
/// path is a straight line. Speed ramps down inside park_radius so the
/// robot settles at the goal. The test point (for example an obstacle
/// position) does not enter the dynamics; with emit_test_point it is
/// appended to every sample so measures can read it. Emitted state:
/// [x, y, d...].
struct TurtlebotParams {
    double x0 = -0.8;
    double y0 = -0.8;
    double goal_x = 0.8;
    double goal_y = 0.8;
    double speed = 0.5;
    double heading_gain = 4.0;
    double heading_noise_std = 0.0; // per-step disturbance on the turn rate
    double speed_scale = 1.0;       // actuator effectiveness (gap knob)
    double park_radius = 0.05;
    bool emit_test_point = true;

    void validate() const;
};

class TurtlebotAdapter final : public SystemAdapter {
public:
    TurtlebotAdapter(SystemSide side, double horizon, double dt, TurtlebotParams params,
                     std::size_t test_dim);

    std::size_t state_dim() const override {
        return 2 + (params_.emit_test_point ? test_dim_ : 0);
    }
    std::size_t d_dim() const override { return test_dim_; }
    Signal rollout(const TestPoint& d, SeededRng rng) const override;

    const TurtlebotParams& params() const { return params_; }

private:
    TurtlebotParams params_;
    std::size_t test_dim_;
};

/// Paired access to the true system and its simulator.
struct SystemPair {
    std::shared_ptr<const SystemAdapter> true_sys;
    std::shared_ptr<const SystemAdapter> sim_sys;
    TestDomain domain;

    void validate() const;
};

/// Monte-Carlo rollout summary.
struct RolloutStats {
    double mean = 0.0;
    std::size_t count = 0;
    double sample_variance = 0.0;
};

/// Mean robustness over M independently seeded rollouts of one adapter;
/// rollout i uses rng.derive(i).
RolloutStats expected_robustness(const SystemAdapter& sys, const Measure& measure,
                                 const TestPoint& d, std::size_t M, SeededRng rng);

/// Mean absolute robustness gap over M paired rollouts. The sides draw from
/// distinct streams (true side rng.derive(2i), sim side rng.derive(2i+1)).
RolloutStats expected_gap(const SystemPair& pair, const Measure& measure, const TestPoint& d,
                          std::size_t M, SeededRng rng);

} // namespace simbound
