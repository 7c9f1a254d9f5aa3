#include "simbound/config.hpp"

#include <cmath>
#include <cstdlib>
#include <memory>

#include "simbound/io.hpp"

namespace simbound {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) fail(path, "unknown key '" + it.key() + "'");
    }
}

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& member(const json& j, const std::string& path, const char* key) {
    const json* v = find(j, key);
    if (!v) fail(path, std::string("missing required key '") + key + "'");
    return *v;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double get_double(const json& j, const std::string& path, const char* key) {
    return as_double(member(j, path, key), path + "." + key);
}

double get_double_or(const json& j, const std::string& path, const char* key, double dflt) {
    const json* v = find(j, key);
    return v ? as_double(*v, path + "." + key) : dflt;
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
        fail(path, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::uint64_t get_u64(const json& j, const std::string& path, const char* key) {
    return as_u64(member(j, path, key), path + "." + key);
}

std::size_t get_size_or(const json& j, const std::string& path, const char* key,
                        std::size_t dflt) {
    const json* v = find(j, key);
    return v ? static_cast<std::size_t>(as_u64(*v, path + "." + key)) : dflt;
}

bool get_bool_or(const json& j, const std::string& path, const char* key, bool dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(path + "." + key, "expected a boolean");
    return v->get<bool>();
}

std::string get_string(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> as_doubles(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) out.push_back(as_double(x, path));
    return out;
}

TestDomain parse_domain(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"lower", "upper"});
    try {
        return TestDomain(as_doubles(member(j, path, "lower"), path + ".lower"),
                          as_doubles(member(j, path, "upper"), path + ".upper"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

json domain_to_json(const TestDomain& d) {
    return json{{"lower", d.lower}, {"upper", d.upper}};
}

BoParams parse_bo(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path,
                   {"B", "R", "delta", "epsilon", "max_iters", "acquisition_restarts",
                    "lambda"});
    BoParams p;
    p.B = get_double(j, path, "B");
    p.R = get_double(j, path, "R");
    p.delta = get_double(j, path, "delta");
    p.epsilon = get_double(j, path, "epsilon");
    p.max_iters = get_size_or(j, path, "max_iters", p.max_iters);
    p.acquisition_restarts = get_size_or(j, path, "acquisition_restarts", p.acquisition_restarts);
    p.lambda = get_double_or(j, path, "lambda", p.lambda);
    try {
        p.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return p;
}

json bo_to_json(const BoParams& p) {
    return json{{"B", p.B},
                {"R", p.R},
                {"delta", p.delta},
                {"epsilon", p.epsilon},
                {"max_iters", p.max_iters},
                {"acquisition_restarts", p.acquisition_restarts},
                {"lambda", p.lambda}};
}

KernelSpec parse_kernel(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"family", "lengthscales", "signal_variance"});
    KernelSpec k;
    try {
        k.family = kernel_family_from_string(get_string(j, path, "family"));
    } catch (const Error& e) {
        fail(path + ".family", e.what());
    }
    k.lengthscales = as_doubles(member(j, path, "lengthscales"), path + ".lengthscales");
    k.signal_variance = get_double_or(j, path, "signal_variance", 1.0);
    try {
        k.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return k;
}

json kernel_to_config_json(const KernelSpec& k) {
    return json{{"family", to_string(k.family)},
                {"lengthscales", k.lengthscales},
                {"signal_variance", k.signal_variance}};
}

const char* kind_name(SystemKind kind) {
    switch (kind) {
    case SystemKind::VelocityTracker: return "builtin-velocity-tracker";
    case SystemKind::Turtlebot: return "builtin-turtlebot";
    case SystemKind::Subprocess: return "subprocess";
    }
    return "unknown";
}

SystemConfig parse_system(const json& j, const std::string& path) {
    require_object(j, path);
    SystemConfig sys;
    const std::string kind = get_string(j, path, "kind");
    if (kind == "builtin-velocity-tracker") {
        sys.kind = SystemKind::VelocityTracker;
        reject_unknown(j, path,
                       {"kind", "tau", "rate_limit", "omega", "zeta", "noise_std",
                        "bias_const", "bias_abs_gain", "v0"});
        VelocityTrackerParams& p = sys.velocity;
        p.tau = get_double_or(j, path, "tau", p.tau);
        p.rate_limit = get_double_or(j, path, "rate_limit", p.rate_limit);
        p.omega = get_double_or(j, path, "omega", p.omega);
        p.zeta = get_double_or(j, path, "zeta", p.zeta);
        p.noise_std = get_double_or(j, path, "noise_std", p.noise_std);
        p.bias_const = get_double_or(j, path, "bias_const", p.bias_const);
        p.bias_abs_gain = get_double_or(j, path, "bias_abs_gain", p.bias_abs_gain);
        p.v0 = get_double_or(j, path, "v0", p.v0);
        try {
            p.validate();
        } catch (const Error& e) {
            fail(path, e.what());
        }
    } else if (kind == "builtin-turtlebot") {
        sys.kind = SystemKind::Turtlebot;
        reject_unknown(j, path,
                       {"kind", "x0", "y0", "goal_x", "goal_y", "speed", "heading_gain",
                        "heading_noise_std", "speed_scale", "park_radius",
                        "emit_test_point"});
        TurtlebotParams& p = sys.turtlebot;
        p.x0 = get_double_or(j, path, "x0", p.x0);
        p.y0 = get_double_or(j, path, "y0", p.y0);
        p.goal_x = get_double_or(j, path, "goal_x", p.goal_x);
        p.goal_y = get_double_or(j, path, "goal_y", p.goal_y);
        p.speed = get_double_or(j, path, "speed", p.speed);
        p.heading_gain = get_double_or(j, path, "heading_gain", p.heading_gain);
        p.heading_noise_std = get_double_or(j, path, "heading_noise_std", p.heading_noise_std);
        p.speed_scale = get_double_or(j, path, "speed_scale", p.speed_scale);
        p.park_radius = get_double_or(j, path, "park_radius", p.park_radius);
        p.emit_test_point = get_bool_or(j, path, "emit_test_point", p.emit_test_point);
        try {
            p.validate();
        } catch (const Error& e) {
            fail(path, e.what());
        }
    } else if (kind == "subprocess") {
        sys.kind = SystemKind::Subprocess;
        reject_unknown(j, path, {"kind", "command", "timeout_ms"});
        const json& cmd = member(j, path, "command");
        if (!cmd.is_array() || cmd.empty())
            fail(path + ".command", "expected a non-empty array of strings");
        for (const json& arg : cmd) {
            if (!arg.is_string()) fail(path + ".command", "expected a non-empty array of strings");
            sys.command.push_back(arg.get<std::string>());
        }
        sys.timeout_ms = static_cast<int>(get_size_or(j, path, "timeout_ms", 5000));
        if (sys.timeout_ms <= 0) fail(path + ".timeout_ms", "must be positive");
    } else {
        fail(path + ".kind",
             "unknown system kind '" + kind +
                 "' (expected builtin-velocity-tracker, builtin-turtlebot, or subprocess)");
    }
    return sys;
}

json system_to_json(const SystemConfig& sys) {
    json j{{"kind", kind_name(sys.kind)}};
    switch (sys.kind) {
    case SystemKind::VelocityTracker: {
        const VelocityTrackerParams& p = sys.velocity;
        j["tau"] = p.tau;
        j["rate_limit"] = p.rate_limit;
        j["omega"] = p.omega;
        j["zeta"] = p.zeta;
        j["noise_std"] = p.noise_std;
        j["bias_const"] = p.bias_const;
        j["bias_abs_gain"] = p.bias_abs_gain;
        j["v0"] = p.v0;
        break;
    }
    case SystemKind::Turtlebot: {
        const TurtlebotParams& p = sys.turtlebot;
        j["x0"] = p.x0;
        j["y0"] = p.y0;
        j["goal_x"] = p.goal_x;
        j["goal_y"] = p.goal_y;
        j["speed"] = p.speed;
        j["heading_gain"] = p.heading_gain;
        j["heading_noise_std"] = p.heading_noise_std;
        j["speed_scale"] = p.speed_scale;
        j["park_radius"] = p.park_radius;
        j["emit_test_point"] = p.emit_test_point;
        break;
    }
    case SystemKind::Subprocess:
        j["command"] = sys.command;
        j["timeout_ms"] = sys.timeout_ms;
        break;
    }
    return j;
}

RepeatConfig parse_repeat(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"b_values", "runs_per_b"});
    RepeatConfig r;
    if (const json* v = find(j, "b_values")) r.b_values = as_doubles(*v, path + ".b_values");
    r.runs_per_b = get_size_or(j, path, "runs_per_b", r.runs_per_b);
    if (r.runs_per_b < 2) fail(path + ".runs_per_b", "must be at least 2");
    for (double b : r.b_values)
        if (!(b > 0.0) || !std::isfinite(b)) fail(path + ".b_values", "values must be positive");
    return r;
}

OracleConfig parse_oracle(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path,
                   {"grid_points_per_dim", "rollouts_per_point", "max_grid_points",
                    "soundness_runs"});
    OracleConfig o;
    o.grid_points_per_dim = get_size_or(j, path, "grid_points_per_dim", o.grid_points_per_dim);
    o.rollouts_per_point = get_size_or(j, path, "rollouts_per_point", o.rollouts_per_point);
    o.max_grid_points = get_size_or(j, path, "max_grid_points", o.max_grid_points);
    o.soundness_runs = get_size_or(j, path, "soundness_runs", o.soundness_runs);
    if (o.grid_points_per_dim < 2) fail(path + ".grid_points_per_dim", "must be at least 2");
    if (o.rollouts_per_point < 2) fail(path + ".rollouts_per_point", "must be at least 2");
    if (o.soundness_runs < 1) fail(path + ".soundness_runs", "must be at least 1");
    return o;
}

} // namespace

bool ExperimentConfig::is_builtin_pair() const {
    return simulator.kind != SystemKind::Subprocess &&
           true_system.kind != SystemKind::Subprocess;
}

void ExperimentConfig::validate() const {
    if (schema_version != 1)
        throw ConfigError("schema_version: unsupported value " + std::to_string(schema_version));
    TestDomain(domain.lower, domain.upper); // re-runs the constructor's box checks
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("pair.horizon: must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("pair.dt: must be positive");
    if (measure.empty()) throw ConfigError("measure: missing");
    kernel.validate();
    if (kernel.dim() != domain.dim())
        throw ConfigError("kernel.lengthscales: dimension does not match the domain");
    robustness_bound.validate();
    gap_bound.validate();
    if (rollouts_per_observation < 1)
        throw ConfigError("rollouts_per_observation: must be at least 1");
    if (repeat.runs_per_b < 2) throw ConfigError("repeat.runs_per_b: must be at least 2");
}

ExperimentConfig experiment_config_from_json(const json& j) {
    const std::string root = "config";
    require_object(j, root);
    reject_unknown(j, root,
                   {"schema_version", "master_seed", "jobs", "out_dir", "domain", "pair",
                    "measure", "kernel", "rollouts_per_observation", "robustness_bound",
                    "gap_bound", "repeat", "oracle"});
    ExperimentConfig cfg;
    cfg.schema_version = static_cast<int>(get_u64(j, root, "schema_version"));
    if (cfg.schema_version != 1)
        fail(root + ".schema_version",
             "unsupported value " + std::to_string(cfg.schema_version));
    cfg.master_seed = get_u64(j, root, "master_seed");
    cfg.jobs = get_size_or(j, root, "jobs", 0);
    if (const json* v = find(j, "out_dir")) {
        if (!v->is_string()) fail(root + ".out_dir", "expected a string");
        cfg.out_dir = v->get<std::string>();
    }
    cfg.domain = parse_domain(member(j, root, "domain"), root + ".domain");

    const json& pair = member(j, root, "pair");
    const std::string pair_path = root + ".pair";
    require_object(pair, pair_path);
    reject_unknown(pair, pair_path, {"horizon", "dt", "simulator", "true_system"});
    cfg.horizon = get_double(pair, pair_path, "horizon");
    cfg.dt = get_double(pair, pair_path, "dt");
    cfg.simulator = parse_system(member(pair, pair_path, "simulator"), pair_path + ".simulator");
    cfg.true_system =
        parse_system(member(pair, pair_path, "true_system"), pair_path + ".true_system");

    try {
        cfg.measure = Measure::from_json(member(j, root, "measure"));
    } catch (const SpecError& e) {
        fail(root + ".measure", e.what());
    }
    cfg.kernel = parse_kernel(member(j, root, "kernel"), root + ".kernel");
    cfg.rollouts_per_observation =
        get_size_or(j, root, "rollouts_per_observation", cfg.rollouts_per_observation);
    cfg.robustness_bound =
        parse_bo(member(j, root, "robustness_bound"), root + ".robustness_bound");
    cfg.gap_bound = parse_bo(member(j, root, "gap_bound"), root + ".gap_bound");
    if (const json* v = find(j, "repeat")) cfg.repeat = parse_repeat(*v, root + ".repeat");
    if (const json* v = find(j, "oracle")) cfg.oracle = parse_oracle(*v, root + ".oracle");
    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j{{"schema_version", cfg.schema_version},
           {"master_seed", cfg.master_seed},
           {"jobs", cfg.jobs},
           {"domain", domain_to_json(cfg.domain)},
           {"pair",
            json{{"horizon", cfg.horizon},
                 {"dt", cfg.dt},
                 {"simulator", system_to_json(cfg.simulator)},
                 {"true_system", system_to_json(cfg.true_system)}}},
           {"measure", cfg.measure.to_json()},
           {"kernel", kernel_to_config_json(cfg.kernel)},
           {"rollouts_per_observation", cfg.rollouts_per_observation},
           {"robustness_bound", bo_to_json(cfg.robustness_bound)},
           {"gap_bound", bo_to_json(cfg.gap_bound)},
           {"repeat",
            json{{"b_values", cfg.repeat.b_values}, {"runs_per_b", cfg.repeat.runs_per_b}}},
           {"oracle",
            json{{"grid_points_per_dim", cfg.oracle.grid_points_per_dim},
                 {"rollouts_per_point", cfg.oracle.rollouts_per_point},
                 {"max_grid_points", cfg.oracle.max_grid_points},
                 {"soundness_runs", cfg.oracle.soundness_runs}}}};
    if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir;
    return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return experiment_config_from_json(read_json_file(path));
}

std::size_t resolve_jobs(const ExperimentConfig& cfg) {
    if (cfg.jobs > 0) return cfg.jobs;
    if (const char* env = std::getenv("SIMBOUND_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

namespace {

std::shared_ptr<const SystemAdapter> make_adapter(const SystemConfig& sys, SystemSide side,
                                                  const ExperimentConfig& cfg) {
    std::shared_ptr<SystemAdapter> adapter;
    switch (sys.kind) {
    case SystemKind::VelocityTracker:
        adapter = std::make_shared<VelocityTrackerAdapter>(side, cfg.horizon, cfg.dt,
                                                           sys.velocity);
        break;
    case SystemKind::Turtlebot:
        adapter = std::make_shared<TurtlebotAdapter>(side, cfg.horizon, cfg.dt, sys.turtlebot,
                                                     cfg.domain.dim());
        break;
    case SystemKind::Subprocess: {
        SubprocessConfig sub;
        sub.command = sys.command;
        sub.timeout_ms = sys.timeout_ms;
        sub.horizon = cfg.horizon;
        sub.dt = cfg.dt;
        adapter = std::make_shared<SubprocessAdapter>(side, sub);
        break;
    }
    }
    adapter->set_domain(cfg.domain);
    return adapter;
}

} // namespace

VerificationConfig build_verification(const ExperimentConfig& cfg) {
    cfg.validate();
    VerificationConfig v;
    v.pair.domain = cfg.domain;
    v.pair.true_sys = make_adapter(cfg.true_system, SystemSide::TrueSystem, cfg);
    v.pair.sim_sys = make_adapter(cfg.simulator, SystemSide::Simulator, cfg);
    v.pair.validate();
    v.measure = cfg.measure;
    v.rob_params = cfg.robustness_bound;
    v.gap_params = cfg.gap_bound;
    v.kernel = cfg.kernel;
    v.rollouts_per_observation = cfg.rollouts_per_observation;
    v.master_seed = cfg.master_seed;
    v.jobs = resolve_jobs(cfg);
    v.validate();
    return v;
}

OracleBudget oracle_budget(const ExperimentConfig& cfg) {
    OracleBudget b;
    b.grid_points_per_dim = cfg.oracle.grid_points_per_dim;
    b.rollouts_per_point = cfg.oracle.rollouts_per_point;
    b.max_grid_points = cfg.oracle.max_grid_points;
    return b;
}

} // namespace simbound
