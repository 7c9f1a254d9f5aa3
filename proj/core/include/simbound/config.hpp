#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "simbound/subprocess.hpp"
#include "simbound/verifier.hpp"

namespace simbound {

/// One side of the pair as described in the experiment document. Only the
/// block matching `kind` is read; the others keep their defaults.
struct SystemConfig {
    SystemKind kind = SystemKind::VelocityTracker;
    VelocityTrackerParams velocity;
    TurtlebotParams turtlebot;
    std::vector<std::string> command; // subprocess argv
    int timeout_ms = 5000;
};

struct RepeatConfig {
    std::vector<double> b_values = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
    std::size_t runs_per_b = 20;
};

struct OracleConfig {
    std::size_t grid_points_per_dim = 200;
    std::size_t rollouts_per_point = 500;
    std::size_t max_grid_points = std::size_t{1} << 22;
    std::size_t soundness_runs = 40;
};

/// Parsed experiment document. Parsing is strict: unknown keys anywhere are
/// rejected with the offending JSON path, and every omitted optional gets
/// its default filled in, so the emitted copy is fully materialized and
/// self-contained.
struct ExperimentConfig {
    int schema_version = 1;
    std::uint64_t master_seed = 0;
    std::size_t jobs = 0;  // 0 = resolve from SIMBOUND_JOBS, else 1
    std::string out_dir;   // optional; the --out flag takes precedence
    TestDomain domain;
    double horizon = 1.0;
    double dt = 0.1;
    SystemConfig simulator;
    SystemConfig true_system;
    Measure measure;
    KernelSpec kernel;
    std::size_t rollouts_per_observation = 20;
    BoParams robustness_bound;
    BoParams gap_bound;
    RepeatConfig repeat;
    OracleConfig oracle;

    bool is_builtin_pair() const;
    void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// Fully materialized document: emit-then-parse-then-emit is a fixpoint,
/// which is what makes provenance copies byte-reproducible.
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Worker threads: cfg.jobs when positive, else the SIMBOUND_JOBS
/// environment variable, else 1. Never affects results.
std::size_t resolve_jobs(const ExperimentConfig& cfg);

/// Instantiates both adapters (spawning child processes for subprocess
/// kinds) and assembles the verifier-facing configuration.
VerificationConfig build_verification(const ExperimentConfig& cfg);

OracleBudget oracle_budget(const ExperimentConfig& cfg);

} // namespace simbound
