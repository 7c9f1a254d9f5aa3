#include "simbound/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace simbound {

void VelocitySpec::validate() const {
    if (!(delta_o > 0.0) || !std::isfinite(delta_o))
        throw SpecError("delta_o must be positive and finite");
    if (!(delta_s > 0.0) || !std::isfinite(delta_s))
        throw SpecError("delta_s must be positive and finite");
    if (!(t_rise > 0.0) || !(t_end > t_rise) || !std::isfinite(t_end))
        throw SpecError("require 0 < t_rise < t_end");
    if (!v_d_from_state && !std::isfinite(v_d)) throw SpecError("v_d must be finite");
}

void ReachAvoidSpec::validate() const {
    if (goal.empty()) throw SpecError("goal point must be non-empty");
    if (goal.size() != obstacle.size())
        throw SpecError("goal and obstacle must share a dimension");
    if (!(delta_g > 0.0) || !std::isfinite(delta_g))
        throw SpecError("delta_g must be positive and finite");
    if (!(delta_o > 0.0) || !std::isfinite(delta_o))
        throw SpecError("delta_o must be positive and finite");
    if (!(deadline > 0.0) || !std::isfinite(deadline))
        throw SpecError("deadline must be positive and finite");
}

namespace {

// Minimum of f over the window [a, b]: every sample instant strictly inside
// plus both endpoints through interpolation. Shared by the specialized
// evaluators and the tree evaluator so their arithmetic is identical.
template <typename F>
double window_min(const Signal& sig, double a, double b, F&& f) {
    const double eps = 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    if (b < a) throw SpecError("window end precedes its start");
    if (sig.t0 > a + eps || sig.t_end() < b - eps)
        throw HorizonError("signal does not cover the evaluation window");

    double m = f(sample_at(sig, a));
    if (b > a) {
        long long i = static_cast<long long>(std::ceil((a - sig.t0) / sig.dt - 1e-9));
        if (i < 0) i = 0;
        for (; i < static_cast<long long>(sig.size()); ++i) {
            const double t = sig.t0 + static_cast<double>(i) * sig.dt;
            if (t <= a + eps) continue;
            if (t >= b - eps) break;
            m = std::min(m, f(sig.samples[static_cast<std::size_t>(i)]));
        }
        m = std::min(m, f(sample_at(sig, b)));
    }
    return m;
}

double distance_to(const std::vector<double>& state, const std::vector<double>& center) {
    double sq = 0.0;
    for (std::size_t j = 0; j < center.size(); ++j) {
        const double diff = state[j] - center[j];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

} // namespace

double eval_reach_avoid(const ReachAvoidSpec& spec, const Signal& signal) {
    spec.validate();
    if (signal.state_dim() < spec.goal.size())
        throw DimensionError("signal state dimension below the spec point dimension");
    const double goal_clause = window_min(signal, 0.0, spec.deadline, [&](const auto& s) {
        return spec.delta_g - distance_to(s, spec.goal);
    });
    const double avoid_clause = window_min(signal, 0.0, spec.deadline, [&](const auto& s) {
        return distance_to(s, spec.obstacle) - spec.delta_o;
    });
    return std::min(goal_clause, avoid_clause);
}

double eval_velocity_spec(const VelocitySpec& spec, const Signal& signal) {
    spec.validate();
    if (spec.vx_index >= signal.state_dim())
        throw DimensionError("vx_index outside the signal state dimension");
    if (spec.v_d_from_state && spec.v_d_index >= signal.state_dim())
        throw DimensionError("v_d_index outside the signal state dimension");
    const double vd =
        spec.v_d_from_state ? signal.samples.front()[spec.v_d_index] : spec.v_d;

    double overshoot;
    if (vd >= 0.0) {
        const double cap = vd + spec.delta_o;
        overshoot = window_min(signal, 0.0, spec.t_rise,
                               [&](const auto& s) { return cap - s[spec.vx_index]; });
    } else {
        const double floor_v = vd - spec.delta_o;
        overshoot = window_min(signal, 0.0, spec.t_rise,
                               [&](const auto& s) { return s[spec.vx_index] - floor_v; });
    }
    const double settle = window_min(signal, spec.t_rise, spec.t_end, [&](const auto& s) {
        return spec.delta_s - std::fabs(vd - s[spec.vx_index]);
    });
    return std::min(overshoot, settle);
}

namespace detail {

struct ConstantNode {
    double value;
};
struct MinNode {
    std::vector<Measure> args;
};
struct MaxNode {
    std::vector<Measure> args;
};
struct WindowNode {
    double t_begin;
    double t_end;
    Measure fn;
};
struct LinearNode {
    std::vector<double> coeffs;
    double offset;
};
struct BallNode {
    std::vector<std::size_t> indices;
    bool center_from_state;
    std::vector<double> center;
    std::vector<std::size_t> center_indices;
    double radius;
    int sign;
};
struct VelocityNode {
    VelocitySpec spec;
};

} // namespace detail

struct Measure::Node {
    std::variant<detail::ConstantNode, detail::MinNode, detail::MaxNode, detail::WindowNode,
                 detail::LinearNode, detail::BallNode, detail::VelocityNode>
        v;

    static const Node& of(const Measure& m) {
        if (!m.node_) throw SpecError("empty measure");
        return *m.node_;
    }

    double eval_point(const std::vector<double>& state) const {
        using namespace detail;
        if (const auto* c = std::get_if<ConstantNode>(&v)) return c->value;
        if (const auto* mn = std::get_if<MinNode>(&v)) {
            double m = std::numeric_limits<double>::infinity();
            for (const Measure& arg : mn->args) m = std::min(m, of(arg).eval_point(state));
            return m;
        }
        if (const auto* mx = std::get_if<MaxNode>(&v)) {
            double m = -std::numeric_limits<double>::infinity();
            for (const Measure& arg : mx->args) m = std::max(m, of(arg).eval_point(state));
            return m;
        }
        if (const auto* lin = std::get_if<LinearNode>(&v)) {
            if (lin->coeffs.size() > state.size())
                throw DimensionError("linear node has more coefficients than state coordinates");
            double acc = lin->offset;
            for (std::size_t j = 0; j < lin->coeffs.size(); ++j)
                acc += lin->coeffs[j] * state[j];
            return acc;
        }
        if (const auto* ball = std::get_if<BallNode>(&v)) {
            double sq = 0.0;
            for (std::size_t j = 0; j < ball->indices.size(); ++j) {
                const std::size_t idx = ball->indices[j];
                if (idx >= state.size())
                    throw DimensionError("ball_margin index outside the state dimension");
                double c;
                if (ball->center_from_state) {
                    const std::size_t cidx = ball->center_indices[j];
                    if (cidx >= state.size())
                        throw DimensionError(
                            "ball_margin center index outside the state dimension");
                    c = state[cidx];
                } else {
                    c = ball->center[j];
                }
                const double diff = state[idx] - c;
                sq += diff * diff;
            }
            const double dist = std::sqrt(sq);
            return ball->sign > 0 ? dist - ball->radius : ball->radius - dist;
        }
        throw SpecError("trajectory-level node used in a pointwise position");
    }

    double eval_traj(const Signal& signal) const {
        using namespace detail;
        if (const auto* c = std::get_if<ConstantNode>(&v)) return c->value;
        if (const auto* mn = std::get_if<MinNode>(&v)) {
            double m = std::numeric_limits<double>::infinity();
            for (const Measure& arg : mn->args) m = std::min(m, of(arg).eval_traj(signal));
            return m;
        }
        if (const auto* mx = std::get_if<MaxNode>(&v)) {
            double m = -std::numeric_limits<double>::infinity();
            for (const Measure& arg : mx->args) m = std::max(m, of(arg).eval_traj(signal));
            return m;
        }
        if (const auto* win = std::get_if<WindowNode>(&v)) {
            const Node& fn = of(win->fn);
            return window_min(signal, win->t_begin, win->t_end,
                              [&](const auto& s) { return fn.eval_point(s); });
        }
        if (const auto* vel = std::get_if<VelocityNode>(&v))
            return eval_velocity_spec(vel->spec, signal);
        throw SpecError("pointwise node used at trajectory level");
    }

    double horizon() const {
        using namespace detail;
        if (std::holds_alternative<ConstantNode>(v) || std::holds_alternative<LinearNode>(v) ||
            std::holds_alternative<BallNode>(v))
            return 0.0;
        if (const auto* mn = std::get_if<MinNode>(&v)) {
            double h = 0.0;
            for (const Measure& arg : mn->args) h = std::max(h, arg.horizon());
            return h;
        }
        if (const auto* mx = std::get_if<MaxNode>(&v)) {
            double h = 0.0;
            for (const Measure& arg : mx->args) h = std::max(h, arg.horizon());
            return h;
        }
        if (const auto* win = std::get_if<WindowNode>(&v)) return win->t_end;
        return std::get<VelocityNode>(v).spec.t_end;
    }

    nlohmann::json to_json() const {
        using namespace detail;
        using nlohmann::json;
        if (const auto* c = std::get_if<ConstantNode>(&v))
            return json{{"op", "constant"}, {"value", c->value}};
        if (const auto* mn = std::get_if<MinNode>(&v)) {
            json args = json::array();
            for (const Measure& a : mn->args) args.push_back(a.to_json());
            return json{{"op", "min"}, {"args", std::move(args)}};
        }
        if (const auto* mx = std::get_if<MaxNode>(&v)) {
            json args = json::array();
            for (const Measure& a : mx->args) args.push_back(a.to_json());
            return json{{"op", "max"}, {"args", std::move(args)}};
        }
        if (const auto* win = std::get_if<WindowNode>(&v))
            return json{{"op", "min_window"},
                        {"t_begin", win->t_begin},
                        {"t_end", win->t_end},
                        {"fn", win->fn.to_json()}};
        if (const auto* lin = std::get_if<LinearNode>(&v))
            return json{{"op", "linear"}, {"coeffs", lin->coeffs}, {"offset", lin->offset}};
        if (const auto* ball = std::get_if<BallNode>(&v)) {
            json j{{"op", "ball_margin"},
                   {"indices", ball->indices},
                   {"radius", ball->radius},
                   {"sign", ball->sign}};
            if (ball->center_from_state)
                j["center_indices"] = ball->center_indices;
            else
                j["center"] = ball->center;
            return j;
        }
        const VelocitySpec& spec = std::get<VelocityNode>(v).spec;
        json j{{"op", "velocity_spec"},
               {"delta_o", spec.delta_o},
               {"delta_s", spec.delta_s},
               {"t_rise", spec.t_rise},
               {"t_end", spec.t_end},
               {"vx_index", spec.vx_index}};
        if (spec.v_d_from_state)
            j["v_d_index"] = spec.v_d_index;
        else
            j["v_d"] = spec.v_d;
        return j;
    }
};

double eval(const Measure& measure, const Signal& signal) {
    return Measure::Node::of(measure).eval_traj(signal);
}

double Measure::horizon() const {
    return Node::of(*this).horizon();
}

nlohmann::json Measure::to_json() const {
    return Node::of(*this).to_json();
}

Measure Measure::constant(double value) {
    if (!std::isfinite(value)) throw SpecError("constant node must be finite");
    return Measure(std::make_shared<const Node>(Node{detail::ConstantNode{value}}));
}

Measure Measure::min_of(std::vector<Measure> args) {
    if (args.empty()) throw SpecError("min node needs at least one argument");
    for (const Measure& a : args)
        if (a.empty()) throw SpecError("min node has an empty argument");
    return Measure(std::make_shared<const Node>(Node{detail::MinNode{std::move(args)}}));
}

Measure Measure::max_of(std::vector<Measure> args) {
    if (args.empty()) throw SpecError("max node needs at least one argument");
    for (const Measure& a : args)
        if (a.empty()) throw SpecError("max node has an empty argument");
    return Measure(std::make_shared<const Node>(Node{detail::MaxNode{std::move(args)}}));
}

Measure Measure::min_window(double t_begin, double t_end, Measure fn) {
    if (!(t_begin >= 0.0) || !std::isfinite(t_begin))
        throw SpecError("window start must be non-negative and finite");
    if (!(t_end >= t_begin) || !std::isfinite(t_end))
        throw SpecError("window end must be finite and not precede its start");
    if (fn.empty()) throw SpecError("window body is empty");
    return Measure(
        std::make_shared<const Node>(Node{detail::WindowNode{t_begin, t_end, std::move(fn)}}));
}

Measure Measure::linear(std::vector<double> coeffs, double offset) {
    for (double c : coeffs)
        if (!std::isfinite(c)) throw SpecError("linear coefficients must be finite");
    if (!std::isfinite(offset)) throw SpecError("linear offset must be finite");
    return Measure(
        std::make_shared<const Node>(Node{detail::LinearNode{std::move(coeffs), offset}}));
}

namespace {

void check_ball(const std::vector<std::size_t>& indices, std::size_t center_size, double radius,
                int sign) {
    if (indices.empty()) throw SpecError("ball_margin needs at least one index");
    if (indices.size() != center_size)
        throw SpecError("ball_margin center and indices must share a dimension");
    if (!(radius >= 0.0) || !std::isfinite(radius))
        throw SpecError("ball_margin radius must be non-negative and finite");
    if (sign != 1 && sign != -1) throw SpecError("ball_margin sign must be +1 or -1");
}

} // namespace

Measure Measure::ball_margin(std::vector<std::size_t> indices, std::vector<double> center,
                             double radius, int sign) {
    check_ball(indices, center.size(), radius, sign);
    for (double c : center)
        if (!std::isfinite(c)) throw SpecError("ball_margin center must be finite");
    return Measure(std::make_shared<const Node>(
        Node{detail::BallNode{std::move(indices), false, std::move(center), {}, radius, sign}}));
}

Measure Measure::ball_margin_at(std::vector<std::size_t> indices,
                                std::vector<std::size_t> center_indices, double radius,
                                int sign) {
    check_ball(indices, center_indices.size(), radius, sign);
    return Measure(std::make_shared<const Node>(Node{
        detail::BallNode{std::move(indices), true, {}, std::move(center_indices), radius, sign}}));
}

Measure Measure::velocity(VelocitySpec spec) {
    spec.validate();
    return Measure(std::make_shared<const Node>(Node{detail::VelocityNode{spec}}));
}

Measure reach_avoid_tree(const ReachAvoidSpec& spec) {
    spec.validate();
    std::vector<std::size_t> indices(spec.goal.size());
    for (std::size_t j = 0; j < indices.size(); ++j) indices[j] = j;
    Measure goal_clause = Measure::min_window(
        0.0, spec.deadline, Measure::ball_margin(indices, spec.goal, spec.delta_g, -1));
    Measure avoid_clause = Measure::min_window(
        0.0, spec.deadline, Measure::ball_margin(indices, spec.obstacle, spec.delta_o, 1));
    return Measure::min_of({std::move(goal_clause), std::move(avoid_clause)});
}

Measure velocity_spec_tree(const VelocitySpec& spec) {
    spec.validate();
    if (spec.v_d_from_state)
        throw SpecError("tree encoding requires a fixed desired velocity");
    Measure overshoot_fn = [&] {
        std::vector<double> coeffs(spec.vx_index + 1, 0.0);
        if (spec.v_d >= 0.0) {
            coeffs[spec.vx_index] = -1.0;
            return Measure::linear(std::move(coeffs), spec.v_d + spec.delta_o);
        }
        coeffs[spec.vx_index] = 1.0;
        return Measure::linear(std::move(coeffs), -(spec.v_d - spec.delta_o));
    }();
    Measure settle_fn = Measure::ball_margin({spec.vx_index}, {spec.v_d}, spec.delta_s, -1);
    return Measure::min_of({Measure::min_window(0.0, spec.t_rise, std::move(overshoot_fn)),
                            Measure::min_window(spec.t_rise, spec.t_end, std::move(settle_fn))});
}

namespace {

using nlohmann::json;

void require_object_keys(const json& j, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional) {
    if (!j.is_object()) throw SpecError("measure node must be a JSON object");
    for (const char* key : required)
        if (!j.contains(key))
            throw SpecError(std::string("measure node missing field '") + key + "'");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        const auto in = [&](std::initializer_list<const char*> list) {
            for (const char* k : list)
                if (key == k) return true;
            return false;
        };
        if (!in(required) && !in(optional))
            throw SpecError("unknown measure field '" + key + "'");
    }
}

double field_as_double(const json& j, const char* key) {
    const json& f = j.at(key);
    if (!f.is_number()) throw SpecError(std::string("measure field '") + key + "' must be a number");
    return f.get<double>();
}

long long field_as_int(const json& j, const char* key) {
    const json& f = j.at(key);
    if (!f.is_number_integer())
        throw SpecError(std::string("measure field '") + key + "' must be an integer");
    return f.get<long long>();
}

std::size_t field_as_index(const json& j, const char* key) {
    const long long v = field_as_int(j, key);
    if (v < 0) throw SpecError(std::string("measure field '") + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> field_as_indices(const json& j, const char* key) {
    const json& f = j.at(key);
    if (!f.is_array())
        throw SpecError(std::string("measure field '") + key + "' must be an array");
    std::vector<std::size_t> out;
    for (const json& e : f) {
        if (!e.is_number_integer() || e.get<long long>() < 0)
            throw SpecError(std::string("measure field '") + key +
                            "' must hold non-negative integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

std::vector<double> field_as_doubles(const json& j, const char* key) {
    const json& f = j.at(key);
    if (!f.is_array())
        throw SpecError(std::string("measure field '") + key + "' must be an array");
    std::vector<double> out;
    for (const json& e : f) {
        if (!e.is_number())
            throw SpecError(std::string("measure field '") + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

} // namespace

Measure Measure::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("op") || !j.at("op").is_string())
        throw SpecError("measure node needs a string 'op' field");
    const std::string op = j.at("op").get<std::string>();
    if (op == "constant") {
        require_object_keys(j, {"op", "value"}, {});
        return constant(field_as_double(j, "value"));
    }
    if (op == "min" || op == "max") {
        require_object_keys(j, {"op", "args"}, {});
        if (!j.at("args").is_array()) throw SpecError("'args' must be an array");
        std::vector<Measure> args;
        for (const json& a : j.at("args")) args.push_back(from_json(a));
        return op == "min" ? min_of(std::move(args)) : max_of(std::move(args));
    }
    if (op == "min_window") {
        require_object_keys(j, {"op", "t_begin", "t_end", "fn"}, {});
        return min_window(field_as_double(j, "t_begin"), field_as_double(j, "t_end"),
                          from_json(j.at("fn")));
    }
    if (op == "linear") {
        require_object_keys(j, {"op", "coeffs", "offset"}, {});
        return linear(field_as_doubles(j, "coeffs"), field_as_double(j, "offset"));
    }
    if (op == "ball_margin") {
        require_object_keys(j, {"op", "indices", "radius", "sign"},
                            {"center", "center_indices"});
        const bool has_center = j.contains("center");
        const bool has_center_indices = j.contains("center_indices");
        if (has_center == has_center_indices)
            throw SpecError("ball_margin needs exactly one of 'center' or 'center_indices'");
        auto indices = field_as_indices(j, "indices");
        const double radius = field_as_double(j, "radius");
        const long long sign = field_as_int(j, "sign");
        if (sign != 1 && sign != -1) throw SpecError("ball_margin sign must be +1 or -1");
        if (has_center)
            return ball_margin(std::move(indices), field_as_doubles(j, "center"), radius,
                               static_cast<int>(sign));
        return ball_margin_at(std::move(indices), field_as_indices(j, "center_indices"), radius,
                              static_cast<int>(sign));
    }
    if (op == "velocity_spec") {
        require_object_keys(j, {"op", "delta_o", "delta_s"},
                            {"v_d", "v_d_index", "t_rise", "t_end", "vx_index"});
        const bool has_vd = j.contains("v_d");
        const bool has_vd_index = j.contains("v_d_index");
        if (has_vd == has_vd_index)
            throw SpecError("velocity_spec needs exactly one of 'v_d' or 'v_d_index'");
        VelocitySpec spec;
        if (has_vd) {
            spec.v_d = field_as_double(j, "v_d");
        } else {
            spec.v_d_from_state = true;
            spec.v_d_index = field_as_index(j, "v_d_index");
        }
        spec.delta_o = field_as_double(j, "delta_o");
        spec.delta_s = field_as_double(j, "delta_s");
        if (j.contains("t_rise")) spec.t_rise = field_as_double(j, "t_rise");
        if (j.contains("t_end")) spec.t_end = field_as_double(j, "t_end");
        if (j.contains("vx_index")) spec.vx_index = field_as_index(j, "vx_index");
        return velocity(spec);
    }
    throw SpecError("unknown measure op '" + op + "'");
}

} // namespace simbound
