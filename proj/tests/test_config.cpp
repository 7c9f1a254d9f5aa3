#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "simbound/config.hpp"
#include "simbound/io.hpp"

using namespace simbound;
using nlohmann::json;

namespace {

json baseline_doc() {
    return json{
        {"schema_version", 1},
        {"master_seed", 42},
        {"domain", {{"lower", {-0.2}}, {"upper", {0.3}}}},
        {"pair",
         {{"horizon", 1.5},
          {"dt", 0.1},
          {"simulator", {{"kind", "builtin-velocity-tracker"}, {"tau", 0.0}}},
          {"true_system", {{"kind", "builtin-velocity-tracker"}, {"tau", 0.0}}}}},
        {"measure",
         {{"op", "velocity_spec"},
          {"v_d_index", 1},
          {"delta_o", 0.1},
          {"delta_s", 0.05}}},
        {"kernel",
         {{"family", "squared_exponential"},
          {"lengthscales", {0.15}},
          {"signal_variance", 0.01}}},
        {"robustness_bound", {{"B", 1.0}, {"R", 0.01}, {"delta", 0.05}, {"epsilon", 0.02}}},
        {"gap_bound", {{"B", 1.0}, {"R", 0.01}, {"delta", 0.05}, {"epsilon", 0.02}}}};
}

std::string parse_error_message(const json& doc) {
    try {
        experiment_config_from_json(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool starts_with(const std::string& text, const std::string& prefix) {
    return text.rfind(prefix, 0) == 0;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path;
}

} // namespace

TEST_CASE("a minimal document parses and every optional gets its default") {
    const ExperimentConfig cfg = experiment_config_from_json(baseline_doc());
    CHECK(cfg.schema_version == 1);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.jobs == 0);
    CHECK(cfg.out_dir.empty());
    CHECK(cfg.domain.dim() == 1);
    CHECK(cfg.horizon == 1.5);
    CHECK(cfg.dt == 0.1);
    CHECK(cfg.simulator.kind == SystemKind::VelocityTracker);
    CHECK(cfg.simulator.velocity.tau == 0.0);
    CHECK(cfg.rollouts_per_observation == 20);
    CHECK(cfg.robustness_bound.max_iters == BoParams{}.max_iters);
    CHECK(cfg.robustness_bound.lambda == BoParams{}.lambda);
    CHECK(cfg.repeat.b_values == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0, 3.5});
    CHECK(cfg.repeat.runs_per_b == 20);
    CHECK(cfg.oracle.grid_points_per_dim == 200);
    CHECK(cfg.oracle.rollouts_per_point == 500);
    CHECK(cfg.oracle.max_grid_points == (std::size_t{1} << 22));
    CHECK(cfg.oracle.soundness_runs == 40);
    CHECK(cfg.is_builtin_pair());
    CHECK(cfg.measure.horizon() == 1.5);
}

TEST_CASE("emit then parse then emit is a fixpoint") {
    const ExperimentConfig cfg = experiment_config_from_json(baseline_doc());
    const json first = experiment_config_to_json(cfg);
    const ExperimentConfig back = experiment_config_from_json(first);
    const json second = experiment_config_to_json(back);
    CHECK(first == second);
    CHECK(first.dump(2) == second.dump(2));
    CHECK_FALSE(first.contains("out_dir")); // omitted while empty

    ExperimentConfig with_out = cfg;
    with_out.out_dir = "runs/demo";
    const json emitted = experiment_config_to_json(with_out);
    CHECK(emitted.at("out_dir") == "runs/demo");
    CHECK(experiment_config_from_json(emitted).out_dir == "runs/demo");
}

TEST_CASE("fixpoint holds for turtlebot and subprocess documents") {
    json doc = baseline_doc();
    doc["domain"] = {{"lower", {-0.5, -0.5}}, {"upper", {0.5, 0.5}}};
    doc["kernel"]["lengthscales"] = {0.25, 0.25};
    doc["measure"] = {{"op", "constant"}, {"value", 0.1}};
    doc["pair"]["simulator"] = {{"kind", "builtin-turtlebot"},
                                {"goal_x", 2.0},
                                {"goal_y", 2.0},
                                {"emit_test_point", true}};
    doc["pair"]["true_system"] = {{"kind", "subprocess"},
                                  {"command", {"/usr/bin/false", "--flag"}},
                                  {"timeout_ms", 1234}};
    const ExperimentConfig cfg = experiment_config_from_json(doc);
    CHECK_FALSE(cfg.is_builtin_pair());
    CHECK(cfg.true_system.command == std::vector<std::string>{"/usr/bin/false", "--flag"});
    CHECK(cfg.true_system.timeout_ms == 1234);
    CHECK(cfg.simulator.turtlebot.goal_x == 2.0);

    const json first = experiment_config_to_json(cfg);
    const json second = experiment_config_to_json(experiment_config_from_json(first));
    CHECK(first == second);
}

TEST_CASE("unknown keys are rejected with the offending path") {
    json doc = baseline_doc();
    doc["flavor"] = "mint";
    CHECK(parse_error_message(doc) == "config: unknown key 'flavor'");

    doc = baseline_doc();
    doc["domain"]["shape"] = "box";
    CHECK(parse_error_message(doc) == "config.domain: unknown key 'shape'");

    doc = baseline_doc();
    doc["pair"]["warmup"] = 1;
    CHECK(parse_error_message(doc) == "config.pair: unknown key 'warmup'");

    doc = baseline_doc();
    doc["pair"]["simulator"]["color"] = "red";
    CHECK(parse_error_message(doc) == "config.pair.simulator: unknown key 'color'");

    doc = baseline_doc();
    doc["kernel"]["nu"] = 2.5;
    CHECK(parse_error_message(doc) == "config.kernel: unknown key 'nu'");

    doc = baseline_doc();
    doc["robustness_bound"]["gamma"] = 0.1;
    CHECK(parse_error_message(doc) == "config.robustness_bound: unknown key 'gamma'");

    doc = baseline_doc();
    doc["repeat"] = {{"runs_per_b", 2}, {"mode", "fast"}};
    CHECK(parse_error_message(doc) == "config.repeat: unknown key 'mode'");

    doc = baseline_doc();
    doc["oracle"] = {{"cache", true}};
    CHECK(parse_error_message(doc) == "config.oracle: unknown key 'cache'");
}

TEST_CASE("missing and mistyped keys are rejected with the offending path") {
    json doc = baseline_doc();
    doc.erase("master_seed");
    CHECK(parse_error_message(doc) == "config: missing required key 'master_seed'");

    doc = baseline_doc();
    doc["master_seed"] = -1;
    CHECK(parse_error_message(doc) == "config.master_seed: expected a nonnegative integer");

    doc = baseline_doc();
    doc["master_seed"] = 1.5;
    CHECK(parse_error_message(doc) == "config.master_seed: expected a nonnegative integer");

    doc = baseline_doc();
    doc["pair"].erase("horizon");
    CHECK(parse_error_message(doc) == "config.pair: missing required key 'horizon'");

    doc = baseline_doc();
    doc["pair"]["horizon"] = "long";
    CHECK(parse_error_message(doc) == "config.pair.horizon: expected a number");

    doc = baseline_doc();
    doc["out_dir"] = 7;
    CHECK(parse_error_message(doc) == "config.out_dir: expected a string");

    doc = baseline_doc();
    doc["domain"]["lower"] = json::array();
    CHECK(parse_error_message(doc) ==
          "config.domain.lower: expected a non-empty array of numbers");

    doc = baseline_doc();
    doc["schema_version"] = 2;
    CHECK(parse_error_message(doc) == "config.schema_version: unsupported value 2");
}

TEST_CASE("system blocks are validated in place") {
    json doc = baseline_doc();
    doc["pair"]["simulator"]["kind"] = "hovercraft";
    CHECK(starts_with(parse_error_message(doc),
                      "config.pair.simulator.kind: unknown system kind 'hovercraft'"));

    doc = baseline_doc();
    doc["pair"]["simulator"] = {{"kind", "subprocess"}, {"command", json::array()}};
    CHECK(parse_error_message(doc) ==
          "config.pair.simulator.command: expected a non-empty array of strings");

    doc = baseline_doc();
    doc["pair"]["simulator"] = {{"kind", "subprocess"},
                                {"command", {"/bin/true"}},
                                {"timeout_ms", 0}};
    CHECK(parse_error_message(doc) == "config.pair.simulator.timeout_ms: must be positive");

    doc = baseline_doc();
    doc["pair"]["true_system"]["tau"] = -0.1;
    CHECK(starts_with(parse_error_message(doc), "config.pair.true_system: "));
}

TEST_CASE("semantic errors from nested components keep their anchors") {
    json doc = baseline_doc();
    doc["robustness_bound"]["B"] = 0.0;
    CHECK(starts_with(parse_error_message(doc), "config.robustness_bound: "));

    doc = baseline_doc();
    doc["kernel"]["family"] = "cubic";
    CHECK(starts_with(parse_error_message(doc), "config.kernel.family: "));

    doc = baseline_doc();
    doc["measure"] = {{"op", "teleport"}};
    CHECK(starts_with(parse_error_message(doc), "config.measure: "));

    doc = baseline_doc();
    doc["repeat"] = {{"runs_per_b", 1}};
    CHECK(parse_error_message(doc) == "config.repeat.runs_per_b: must be at least 2");

    doc = baseline_doc();
    doc["repeat"] = {{"b_values", {1.0, 0.0}}};
    CHECK(parse_error_message(doc) == "config.repeat.b_values: values must be positive");

    doc = baseline_doc();
    doc["oracle"] = {{"rollouts_per_point", 1}};
    CHECK(parse_error_message(doc) == "config.oracle.rollouts_per_point: must be at least 2");

    doc = baseline_doc();
    doc["oracle"] = {{"grid_points_per_dim", 1}};
    CHECK(parse_error_message(doc) == "config.oracle.grid_points_per_dim: must be at least 2");

    doc = baseline_doc();
    doc["kernel"]["lengthscales"] = {0.15, 0.15};
    CHECK(parse_error_message(doc) ==
          "kernel.lengthscales: dimension does not match the domain");
}

TEST_CASE("json files are parsed with a line and column anchor") {
    const auto path = temp_file("simbound_broken.json", "{\n  \"schema_version\": 1,\n  oops\n}\n");
    try {
        load_experiment_config(path);
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(path.string() + ":3:") != std::string::npos);
    }
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_experiment_config("/nonexistent/simbound.json"), FormatError);
}

TEST_CASE("documents shipped in configs/ parse and round-trip") {
    const std::filesystem::path dir = SIMBOUND_CONFIG_DIR;
    for (const char* name : {"zero_gap.json", "injected_gap.json"}) {
        CAPTURE(name);
        const ExperimentConfig cfg = load_experiment_config(dir / name);
        CHECK(cfg.is_builtin_pair());
        const json first = experiment_config_to_json(cfg);
        const json second = experiment_config_to_json(experiment_config_from_json(first));
        CHECK(first == second);
    }

    const ExperimentConfig injected = load_experiment_config(dir / "injected_gap.json");
    CHECK(injected.master_seed == 7151);
    CHECK(injected.domain.lower == std::vector<double>{-1.0});
    CHECK(injected.domain.upper == std::vector<double>{1.0});
    CHECK(injected.simulator.velocity.bias_const == 0.0);
    CHECK(injected.true_system.velocity.bias_const == 0.05);
    CHECK(injected.true_system.velocity.bias_abs_gain == 0.1);
}

TEST_CASE("jobs resolve from the config first and the environment second") {
    ExperimentConfig cfg = experiment_config_from_json(baseline_doc());

    const char* saved = std::getenv("SIMBOUND_JOBS");
    const std::string saved_value = saved ? saved : "";

    cfg.jobs = 3;
    ::setenv("SIMBOUND_JOBS", "7", 1);
    CHECK(resolve_jobs(cfg) == 3);

    cfg.jobs = 0;
    CHECK(resolve_jobs(cfg) == 7);

    ::setenv("SIMBOUND_JOBS", "not-a-number", 1);
    CHECK(resolve_jobs(cfg) == 1);

    ::setenv("SIMBOUND_JOBS", "0", 1);
    CHECK(resolve_jobs(cfg) == 1);

    ::unsetenv("SIMBOUND_JOBS");
    CHECK(resolve_jobs(cfg) == 1);

    if (saved)
        ::setenv("SIMBOUND_JOBS", saved_value.c_str(), 1);
}

TEST_CASE("build_verification instantiates a working builtin pair") {
    json doc = baseline_doc();
    doc["rollouts_per_observation"] = 1;
    const ExperimentConfig cfg = experiment_config_from_json(doc);
    const VerificationConfig v = build_verification(cfg);

    CHECK(v.master_seed == 42);
    CHECK(v.rollouts_per_observation == 1);
    CHECK(v.pair.true_sys->side() == SystemSide::TrueSystem);
    CHECK(v.pair.sim_sys->side() == SystemSide::Simulator);
    CHECK(v.pair.true_sys->horizon() == 1.5);
    CHECK(v.pair.true_sys->dt() == 0.1);

    const Signal s = v.pair.sim_sys->rollout({0.2}, SeededRng(1, 0));
    CHECK(s.samples.size() == 16);
    // The experiment domain is installed on the adapters.
    CHECK_THROWS_AS(v.pair.sim_sys->rollout({0.31}, SeededRng(1, 0)), DomainError);

    const OracleBudget budget = oracle_budget(cfg);
    CHECK(budget.grid_points_per_dim == cfg.oracle.grid_points_per_dim);
    CHECK(budget.rollouts_per_point == cfg.oracle.rollouts_per_point);
    CHECK(budget.max_grid_points == cfg.oracle.max_grid_points);
}

TEST_CASE("io helpers round-trip the report and certificate schemas") {
    BoundCertificate cert;
    cert.direction = BoundDirection::LowerMin;
    cert.bound = -0.25;
    cert.epsilon = 0.02;
    cert.delta = 0.05;
    cert.iterations = 2;
    cert.trace = {{{0.05}, 0.3, 1.2, 0.4}, {{-0.1}, 0.31, 1.25, 0.01}};
    cert.final_dataset.points = {{0.05}, {-0.1}};
    cert.final_dataset.observations = {0.3, 0.31};
    cert.argbest = {-0.1};
    cert.params.B = 1.0;
    cert.params.R = 0.01;
    cert.params.delta = 0.05;
    cert.params.epsilon = 0.02;
    cert.kernel.family = KernelFamily::SquaredExponential;
    cert.kernel.lengthscales = {0.15};

    const BoundCertificate back = certificate_from_json(certificate_to_json(cert));
    CHECK(back.bound == cert.bound);
    CHECK(back.direction == cert.direction);
    CHECK(back.trace.size() == 2);
    CHECK(back.trace[1].z == cert.trace[1].z);
    CHECK(back.final_dataset.observations == cert.final_dataset.observations);
    CHECK(back.params.B == 1.0);
    CHECK(back.kernel.lengthscales == cert.kernel.lengthscales);

    VerificationReport report;
    report.rob_cert = cert;
    report.gap_cert = cert;
    report.gap_cert.direction = BoundDirection::UpperMax;
    report.rho_hat_e = -0.25;
    report.e_e = 0.01;
    report.e_e_floored = 0.01;
    report.rho_e = -0.26;
    report.epsilon = 0.06;
    report.confidence = 0.9025;
    report.master_seed = 42;
    const VerificationReport rt = report_from_json(report_to_json(report));
    CHECK(rt.rho_e == report.rho_e);
    CHECK(rt.confidence == report.confidence);
    CHECK(rt.master_seed == 42);
    CHECK(rt.gap_cert.direction == BoundDirection::UpperMax);
}
