#include "simbound/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

namespace simbound {

void VerificationConfig::validate() const {
    pair.validate();
    if (measure.empty()) throw ConfigError("verification config has no measure");
    rob_params.validate();
    gap_params.validate();
    kernel.validate();
    if (kernel.dim() != pair.domain.dim())
        throw DimensionError("kernel lengthscale dimension does not match the domain");
    if (rollouts_per_observation == 0)
        throw ConfigError("rollouts_per_observation must be at least 1");
    const double h = measure.horizon();
    const double covered = pair.true_sys->horizon();
    if (covered + 1e-9 < h)
        throw HorizonError("system horizon is shorter than the measure horizon");
}

namespace {

// Deterministic parallel map: results land in a preallocated vector by
// index, so the reduction order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
                next.store(n); // stop handing out work
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

struct NoiseAccumulator {
    double sum_std_error = 0.0;
    double max_std_error = 0.0;
    std::size_t queries = 0;

    void record(const RolloutStats& stats) {
        const double se = stats.count > 1
                              ? std::sqrt(stats.sample_variance /
                                          static_cast<double>(stats.count))
                              : 0.0;
        sum_std_error += se;
        max_std_error = std::max(max_std_error, se);
        ++queries;
    }

    NoiseDiagnostics snapshot() const {
        NoiseDiagnostics d;
        d.queries = queries;
        d.max_std_error = max_std_error;
        d.mean_std_error = queries > 0 ? sum_std_error / static_cast<double>(queries) : 0.0;
        return d;
    }
};

Objective robustness_objective(const VerificationConfig& cfg,
                               const std::shared_ptr<NoiseAccumulator>& noise) {
    Objective obj;
    obj.domain = cfg.pair.domain;
    obj.sampler = [&cfg, noise](const TestPoint& d, SeededRng& rng) {
        const RolloutStats stats = expected_robustness(*cfg.pair.sim_sys, cfg.measure, d,
                                                       cfg.rollouts_per_observation, rng);
        if (noise) noise->record(stats);
        return stats.mean;
    };
    return obj;
}

Objective gap_objective(const VerificationConfig& cfg,
                        const std::shared_ptr<NoiseAccumulator>& noise) {
    Objective obj;
    obj.domain = cfg.pair.domain;
    obj.sampler = [&cfg, noise](const TestPoint& d, SeededRng& rng) {
        const RolloutStats stats =
            expected_gap(cfg.pair, cfg.measure, d, cfg.rollouts_per_observation, rng);
        if (noise) noise->record(stats);
        return stats.mean;
    };
    return obj;
}

SeededRng root_rng(const VerificationConfig& cfg) { return SeededRng(cfg.master_seed, 0); }

BoundCertificate bound_sim_robustness_rooted(const VerificationConfig& cfg, const SeededRng& root,
                                             const BoParams& params,
                                             const std::shared_ptr<NoiseAccumulator>& noise) {
    const Objective obj = robustness_objective(cfg, noise);
    const Dataset init = initial_dataset(obj, root.derive(seed_streams::kRobustnessInit));
    return lower_bound_min(obj, params, cfg.kernel, init,
                           root.derive(seed_streams::kRobustnessBo));
}

BoundCertificate bound_gap_rooted(const VerificationConfig& cfg, const SeededRng& root,
                                  const std::shared_ptr<NoiseAccumulator>& noise) {
    const Objective obj = gap_objective(cfg, noise);
    const Dataset init = initial_dataset(obj, root.derive(seed_streams::kGapInit));
    return run(obj, cfg.gap_params, cfg.kernel, init, root.derive(seed_streams::kGapBo));
}

VerificationReport verify_rooted(const VerificationConfig& cfg, const SeededRng& root) {
    auto rob_noise = std::make_shared<NoiseAccumulator>();
    auto gap_noise = std::make_shared<NoiseAccumulator>();
    const BoundCertificate rob =
        bound_sim_robustness_rooted(cfg, root, cfg.rob_params, rob_noise);
    const BoundCertificate gap = bound_gap_rooted(cfg, root, gap_noise);
    VerificationReport report = combine(rob, gap);
    report.rob_noise = rob_noise->snapshot();
    report.gap_noise = gap_noise->snapshot();
    report.master_seed = cfg.master_seed;
    return report;
}

} // namespace

BoundCertificate bound_sim_robustness(const VerificationConfig& cfg) {
    cfg.validate();
    return bound_sim_robustness_rooted(cfg, root_rng(cfg), cfg.rob_params, nullptr);
}

BoundCertificate bound_gap(const VerificationConfig& cfg) {
    cfg.validate();
    return bound_gap_rooted(cfg, root_rng(cfg), nullptr);
}

VerificationReport combine(const BoundCertificate& rob_cert, const BoundCertificate& gap_cert) {
    if (rob_cert.direction != BoundDirection::LowerMin)
        throw ParameterError("robustness certificate must be a lower bound on a minimum");
    if (gap_cert.direction != BoundDirection::UpperMax)
        throw ParameterError("gap certificate must be an upper bound on a maximum");
    VerificationReport r;
    r.rho_hat_e = rob_cert.bound;
    r.e_e = gap_cert.bound;
    r.e_e_floored = std::max(0.0, gap_cert.bound);
    r.rho_e = rob_cert.bound - gap_cert.bound;
    r.epsilon = 2.0 * gap_cert.bound + rob_cert.epsilon + gap_cert.epsilon;
    r.confidence = (1.0 - rob_cert.delta) * (1.0 - gap_cert.delta);
    r.rob_cert = rob_cert;
    r.gap_cert = gap_cert;
    return r;
}

VerificationReport verify(const VerificationConfig& cfg) {
    cfg.validate();
    return verify_rooted(cfg, root_rng(cfg));
}

RepeatabilityResult repeatability_study(const VerificationConfig& cfg,
                                        std::vector<double> B_values, std::size_t runs_per_B) {
    cfg.validate();
    if (B_values.empty()) B_values = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
    for (double B : B_values)
        if (!(B > 0.0) || !std::isfinite(B))
            throw ParameterError("every B value must be positive and finite");
    if (runs_per_B < 2) throw ParameterError("runs_per_B must be at least 2");

    const std::size_t total = B_values.size() * runs_per_B;
    RepeatabilityResult result;
    result.tolerance = cfg.rob_params.epsilon;
    result.runs.resize(total);

    const SeededRng root = root_rng(cfg);
    parallel_for(total, cfg.jobs, [&](std::size_t idx) {
        const std::size_t b_index = idx / runs_per_B;
        const std::uint64_t stream = seed_streams::kRepeatBase + idx;
        const SeededRng run_root = root.derive(stream);

        BoParams params = cfg.rob_params;
        params.B = B_values[b_index];

        RepeatabilityRun& run = result.runs[idx];
        run.B = params.B;
        run.seed = run_root.stream();
        try {
            const BoundCertificate cert =
                bound_sim_robustness_rooted(cfg, run_root, params, nullptr);
            run.rho_hat_e = cert.bound;
            run.iterations = cert.iterations;
            run.completed = true;
            run.status = "ok";
        } catch (const UnterminatedError&) {
            run.completed = false;
            run.status = "unterminated";
            run.iterations = cfg.rob_params.max_iters;
        }
    });

    double lo = 0.0;
    double hi = 0.0;
    for (const RepeatabilityRun& run : result.runs) {
        if (!run.completed) continue;
        if (result.completed == 0) {
            lo = hi = run.rho_hat_e;
        } else {
            lo = std::min(lo, run.rho_hat_e);
            hi = std::max(hi, run.rho_hat_e);
        }
        ++result.completed;
    }
    result.spread = result.completed > 0 ? hi - lo : 0.0;
    result.pass = result.completed >= 2 && result.spread <= result.tolerance;
    return result;
}

namespace {

enum class OracleTarget { RhoStarTrue, RhoHatStarSim, EStar };

OracleEstimate grid_mc_oracle(const VerificationConfig& cfg, const OracleBudget& budget,
                              OracleTarget target) {
    cfg.validate();
    if (budget.rollouts_per_point < 2)
        throw ParameterError("oracle needs at least 2 rollouts per point");
    oracles::GridSpec grid;
    grid.points_per_dim = budget.grid_points_per_dim;
    grid.domain = cfg.pair.domain;
    grid.budget = budget.max_grid_points;
    const std::size_t total = grid.total_points();
    if (total > grid.budget)
        throw BudgetError("oracle grid exceeds its point budget");

    const SeededRng oracle_rng = root_rng(cfg).derive(seed_streams::kOracle);
    std::vector<double> means(total);
    std::vector<double> errs(total);
    parallel_for(total, cfg.jobs, [&](std::size_t i) {
        const TestPoint d = oracles::grid_point(grid, i);
        const auto sampler = [&](SeededRng& rng) -> double {
            switch (target) {
            case OracleTarget::RhoStarTrue:
                return eval(cfg.measure, cfg.pair.true_sys->rollout(d, rng));
            case OracleTarget::RhoHatStarSim:
                return eval(cfg.measure, cfg.pair.sim_sys->rollout(d, rng));
            case OracleTarget::EStar:
            default: {
                const Signal s_true = cfg.pair.true_sys->rollout(d, rng.derive(0));
                const Signal s_sim = cfg.pair.sim_sys->rollout(d, rng.derive(1));
                return std::fabs(eval(cfg.measure, s_true) - eval(cfg.measure, s_sim));
            }
            }
        };
        const oracles::McEstimate est =
            oracles::mc_expectation(sampler, budget.rollouts_per_point, oracle_rng.derive(i));
        means[i] = est.mean;
        errs[i] = est.stderr_of_mean;
    });

    const bool maximize = target == OracleTarget::EStar;
    std::size_t best = 0;
    for (std::size_t i = 1; i < total; ++i) {
        // Strict comparison keeps the lexicographically smallest tie-winner,
        // matching grid_optimum's row-major visit order.
        if (maximize ? means[i] > means[best] : means[i] < means[best]) best = i;
    }
    OracleEstimate est;
    est.argopt = oracles::grid_point(grid, best);
    est.value = means[best];
    est.std_error = errs[best];
    return est;
}

} // namespace

OracleEstimate oracle_rho_star(const VerificationConfig& cfg, const OracleBudget& budget) {
    return grid_mc_oracle(cfg, budget, OracleTarget::RhoStarTrue);
}

OracleEstimate oracle_rho_hat_star(const VerificationConfig& cfg, const OracleBudget& budget) {
    return grid_mc_oracle(cfg, budget, OracleTarget::RhoHatStarSim);
}

OracleEstimate oracle_e_star(const VerificationConfig& cfg, const OracleBudget& budget) {
    return grid_mc_oracle(cfg, budget, OracleTarget::EStar);
}

SoundnessReport end_to_end_soundness(const VerificationConfig& cfg, const OracleBudget& budget,
                                     std::size_t runs) {
    cfg.validate();
    if (runs == 0) throw ParameterError("soundness study needs at least one run");

    SoundnessReport report;
    report.rho_star = oracle_rho_star(cfg, budget);
    report.slack = 2.0 * report.rho_star.std_error;
    report.runs.resize(runs);

    const SeededRng root = root_rng(cfg);
    parallel_for(runs, cfg.jobs, [&](std::size_t i) {
        const SeededRng run_root = root.derive(seed_streams::kSoundnessBase + i);
        SoundnessRun& run = report.runs[i];
        run.index = i;
        try {
            const VerificationReport vr = verify_rooted(cfg, run_root);
            run.rho_hat_e = vr.rho_hat_e;
            run.e_e = vr.e_e;
            run.rho_e = vr.rho_e;
            run.epsilon = vr.epsilon;
            run.lower_ok = report.rho_star.value + report.slack >= vr.rho_e;
            run.width_ok =
                std::fabs(report.rho_star.value - vr.rho_e) <= vr.epsilon + report.slack;
        } catch (const UnterminatedError&) {
            run.lower_ok = false;
            run.width_ok = false;
        }
    });

    std::size_t lower = 0;
    std::size_t width = 0;
    std::size_t joint = 0;
    for (const SoundnessRun& run : report.runs) {
        lower += run.lower_ok ? 1 : 0;
        width += run.width_ok ? 1 : 0;
        joint += (run.lower_ok && run.width_ok) ? 1 : 0;
    }
    report.lower_rate = static_cast<double>(lower) / static_cast<double>(runs);
    report.width_rate = static_cast<double>(width) / static_cast<double>(runs);
    report.joint_rate = static_cast<double>(joint) / static_cast<double>(runs);
    return report;
}

} // namespace simbound
