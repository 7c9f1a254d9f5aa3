#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "simbound/domain.hpp"

namespace simbound {

/// Quantitative velocity-tracking requirement: after a commanded step to
/// v_d the tracked coordinate may overshoot by at most delta_o during the
/// rise window [0, t_rise] and must stay within delta_s of v_d over the
/// settling window [t_rise, t_end]. The command is either a fixed value or
/// read from a state coordinate at the first sample.
struct VelocitySpec {
    double v_d = 0.0;
    bool v_d_from_state = false;
    std::size_t v_d_index = 0;
    double delta_o = 0.0;
    double delta_s = 0.0;
    double t_rise = 0.5;
    double t_end = 1.5;
    std::size_t vx_index = 0;

    void validate() const;
};

/// Reach-avoid requirement over the first coordinates of the state: at
/// every sampled time in [0, deadline] stay within delta_g of the goal and
/// keep at least delta_o clearance from the obstacle. Positive robustness
/// means satisfied with margin.
struct ReachAvoidSpec {
    std::vector<double> goal;
    double delta_g = 0.0;
    std::vector<double> obstacle;
    double delta_o = 0.0;
    double deadline = 0.0;

    void validate() const;
};

double eval_velocity_spec(const VelocitySpec& spec, const Signal& signal);
double eval_reach_avoid(const ReachAvoidSpec& spec, const Signal& signal);

/// Composable robustness measure. A tree mixes trajectory-level nodes
/// (min_window, velocity_spec) with pointwise nodes (linear, ball_margin)
/// that only make sense under a window; constant/min/max work in either
/// role. Trees serialize to a small JSON schema.
class Measure {
public:
    Measure() = default;

    static Measure constant(double value);
    static Measure min_of(std::vector<Measure> args);
    static Measure max_of(std::vector<Measure> args);
    /// min over t in [t_begin, t_end] of fn evaluated pointwise; the window
    /// endpoints are included through interpolated samples.
    static Measure min_window(double t_begin, double t_end, Measure fn);
    /// coeffs . state + offset
    static Measure linear(std::vector<double> coeffs, double offset);
    /// Signed margin of the selected coordinates against a ball. sign=+1
    /// rewards being outside (distance - radius), sign=-1 rewards being
    /// inside (radius - distance). The center is a literal point.
    static Measure ball_margin(std::vector<std::size_t> indices, std::vector<double> center,
                               double radius, int sign);
    /// Ball margin whose center is read from other state coordinates at the
    /// same instant (for requirements parameterized by the test point when
    /// the adapter embeds it in the state).
    static Measure ball_margin_at(std::vector<std::size_t> indices,
                                  std::vector<std::size_t> center_indices, double radius,
                                  int sign);
    static Measure velocity(VelocitySpec spec);

    bool empty() const { return node_ == nullptr; }

    /// Latest absolute time the measure reads.
    double horizon() const;

    nlohmann::json to_json() const;
    static Measure from_json(const nlohmann::json& j);

    friend double eval(const Measure& measure, const Signal& signal);

private:
    struct Node;
    explicit Measure(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Robustness of a signal under a measure tree. Throws SpecError when a
/// pointwise node appears at trajectory level (or a window node below a
/// window) and HorizonError when the signal does not cover the horizon.
double eval(const Measure& measure, const Signal& signal);

/// Tree encodings of the two built-in requirements. Evaluation agrees with
/// the direct functions above.
Measure reach_avoid_tree(const ReachAvoidSpec& spec);
Measure velocity_spec_tree(const VelocitySpec& spec);

} // namespace simbound
