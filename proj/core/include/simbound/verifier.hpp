#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simbound/bo.hpp"
#include "simbound/oracles.hpp"
#include "simbound/systems.hpp"

namespace simbound {

/// Everything one certification run needs: the system pair, the robustness
/// measure, per-problem optimizer parameters, the shared kernel, the number
/// of rollouts per observation M, and the master seed all derived streams
/// come from.
struct VerificationConfig {
    SystemPair pair;
    Measure measure;
    BoParams rob_params; // (B0, R0, delta0, epsilon0) for the robustness bound
    BoParams gap_params; // (B1, R1, delta1, epsilon1) for the gap bound
    KernelSpec kernel;
    std::size_t rollouts_per_observation = 20;
    std::uint64_t master_seed = 0;
    std::size_t jobs = 1; // worker threads for study/oracle loops

    void validate() const;
};

/// Fixed stream enumeration under the master seed. Every task derives its
/// RNG as SeededRng(master_seed, 0).derive(code), so any sub-run can be
/// replayed in isolation.
namespace seed_streams {
inline constexpr std::uint64_t kRobustnessInit = 1;
inline constexpr std::uint64_t kRobustnessBo = 2;
inline constexpr std::uint64_t kGapInit = 3;
inline constexpr std::uint64_t kGapBo = 4;
inline constexpr std::uint64_t kOracle = 5;
inline constexpr std::uint64_t kOracleArgmin = 6;
inline constexpr std::uint64_t kPlotTrace = 7;
inline constexpr std::uint64_t kRepeatBase = 1000;    // + run index
inline constexpr std::uint64_t kSoundnessBase = 2000; // + run index
} // namespace seed_streams

/// Standard error of the Monte-Carlo observations fed to the optimizer,
/// reported so a configured R can be sanity-checked.
struct NoiseDiagnostics {
    double mean_std_error = 0.0;
    double max_std_error = 0.0;
    std::size_t queries = 0;
};

struct VerificationReport {
    double rho_hat_e = 0.0;    // certified lower bound on min E[rho] of the simulator
    double e_e = 0.0;          // certified upper bound on max E[|gap|]
    double e_e_floored = 0.0;  // max(0, e_e), reported alongside the raw value
    double rho_e = 0.0;        // rho_hat_e - e_e
    double epsilon = 0.0;      // 2*e_e + epsilon0 + epsilon1
    double confidence = 0.0;   // (1-delta0)(1-delta1)
    BoundCertificate rob_cert;
    BoundCertificate gap_cert;
    NoiseDiagnostics rob_noise;
    NoiseDiagnostics gap_noise;
    std::uint64_t master_seed = 0;
};

/// Lower bound on the simulator's minimum expected robustness over the
/// domain, with (epsilon0, delta0) semantics.
BoundCertificate bound_sim_robustness(const VerificationConfig& cfg);

/// Upper bound on the maximum expected sim-vs-real robustness gap, with
/// (epsilon1, delta1) semantics.
BoundCertificate bound_gap(const VerificationConfig& cfg);

/// Pure arithmetic combination of the two certificates. The identities
/// rho_e == rho_hat_e - e_e, epsilon == 2*e_e + eps0 + eps1 and
/// confidence == (1-delta0)*(1-delta1) hold exactly.
VerificationReport combine(const BoundCertificate& rob_cert, const BoundCertificate& gap_cert);

/// bound_sim_robustness + bound_gap + combine, with noise diagnostics.
VerificationReport verify(const VerificationConfig& cfg);

struct RepeatabilityRun {
    double B = 0.0;
    std::uint64_t seed = 0; // derived stream id; replay via SeededRng(master_seed, seed)
    double rho_hat_e = 0.0;
    std::size_t iterations = 0;
    bool completed = false;
    std::string status; // "ok" or the failure reason
};

struct RepeatabilityResult {
    std::vector<RepeatabilityRun> runs;
    double spread = 0.0;    // max - min of rho_hat_e over completed runs
    double tolerance = 0.0; // epsilon0
    std::size_t completed = 0;
    bool pass = false; // spread <= tolerance over the completed runs
};

/// Repeatability protocol: bound_sim_robustness for every (B, run index)
/// pair with derived seeds. Unterminated runs are reported with their
/// status, not hidden. Empty B_values selects {1.0, 1.5, 2.0, 2.5, 3.0, 3.5}.
RepeatabilityResult repeatability_study(const VerificationConfig& cfg,
                                        std::vector<double> B_values = {},
                                        std::size_t runs_per_B = 20);

/// Budgets for the brute-force ground-truth estimates.
struct OracleBudget {
    std::size_t grid_points_per_dim = 200;
    std::size_t rollouts_per_point = 500;
    std::size_t max_grid_points = 1u << 22;
};

struct OracleEstimate {
    TestPoint argopt;
    double value = 0.0;
    double std_error = 0.0; // Monte-Carlo standard error at the optimizer
};

/// Grid x Monte-Carlo estimate of min_d E[rho] on the true system.
OracleEstimate oracle_rho_star(const VerificationConfig& cfg, const OracleBudget& budget);
/// Same estimate on the simulator side (the repeatability target).
OracleEstimate oracle_rho_hat_star(const VerificationConfig& cfg, const OracleBudget& budget);
/// Grid x Monte-Carlo estimate of max_d E[|gap|].
OracleEstimate oracle_e_star(const VerificationConfig& cfg, const OracleBudget& budget);

struct SoundnessRun {
    std::uint64_t index = 0;
    double rho_hat_e = 0.0;
    double e_e = 0.0;
    double rho_e = 0.0;
    double epsilon = 0.0;
    bool lower_ok = false; // rho_star >= rho_e (up to oracle slack)
    bool width_ok = false; // |rho_star - rho_e| <= epsilon (up to oracle slack)
};

struct SoundnessReport {
    OracleEstimate rho_star;
    double slack = 0.0; // 2 * oracle standard error
    std::vector<SoundnessRun> runs;
    double lower_rate = 0.0;
    double width_rate = 0.0;
    double joint_rate = 0.0;
};

/// Desk-scale check of the final claim: estimate rho_star on the true side,
/// run the full verification `runs` times with derived seeds, and report
/// how often the certified bound and width hold against the oracle.
SoundnessReport end_to_end_soundness(const VerificationConfig& cfg, const OracleBudget& budget,
                                     std::size_t runs);

} // namespace simbound
