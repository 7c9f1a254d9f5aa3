#include "simbound/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "simbound/config.hpp"
#include "simbound/io.hpp"

namespace simbound {

using nlohmann::json;

namespace {

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg, const CliOptions& opts) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    throw ConfigError("no output directory: pass --out or set out_dir in the config");
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const CliOptions& opts) {
    if (opts.jobs > 0) cfg.jobs = opts.jobs;
    return cfg;
}

void write_materialized(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
    write_json_file(dir / "config.materialized.json", experiment_config_to_json(cfg));
}

std::string describe_certificate(const char* label, const BoundCertificate& cert) {
    std::ostringstream out;
    out << label << ": bound " << format_double(cert.bound) << " after " << cert.iterations
        << " iterations (epsilon " << format_double(cert.epsilon) << ", delta "
        << format_double(cert.delta) << ")\n";
    return out.str();
}

std::string verify_summary(const VerificationReport& report) {
    std::ostringstream out;
    out << "certified bounds\n"
        << "  rho_hat_e  = " << format_double(report.rho_hat_e)
        << "  (lower bound, simulator robustness)\n"
        << "  e_e        = " << format_double(report.e_e) << "  (upper bound, sim-vs-real gap";
    if (report.e_e_floored != report.e_e)
        out << "; floored " << format_double(report.e_e_floored);
    out << ")\n"
        << "  rho_e      = " << format_double(report.rho_e) << "  (= rho_hat_e - e_e)\n"
        << "  epsilon    = " << format_double(report.epsilon) << "\n"
        << "  confidence = " << format_double(report.confidence) << "\n"
        << describe_certificate("robustness run", report.rob_cert)
        << describe_certificate("gap run", report.gap_cert)
        << "observation noise (standard error of the Monte-Carlo means)\n"
        << "  robustness: mean " << format_double(report.rob_noise.mean_std_error) << ", max "
        << format_double(report.rob_noise.max_std_error) << " over " << report.rob_noise.queries
        << " queries\n"
        << "  gap:        mean " << format_double(report.gap_noise.mean_std_error) << ", max "
        << format_double(report.gap_noise.max_std_error) << " over " << report.gap_noise.queries
        << " queries\n";
    return out.str();
}

/// Maps exceptions thrown after configs validated to the run-failure code.
int run_failure(std::ostream& err, const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRunFailure;
}

} // namespace

int cmd_verify(const std::filesystem::path& config_path, const CliOptions& opts,
               std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    std::filesystem::path dir;
    try {
        cfg = apply_overrides(load_experiment_config(config_path), opts);
        dir = resolve_out_dir(cfg, opts);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        std::filesystem::create_directories(dir);
        write_materialized(dir, cfg);
        const VerificationConfig vcfg = build_verification(cfg);
        const VerificationReport report = verify(vcfg);

        json report_json = report_to_json(report);
        report_json["config"] = experiment_config_to_json(cfg);
        write_json_file(dir / "report.json", report_json);
        write_json_file(dir / "cert_robustness.json", certificate_to_json(report.rob_cert));
        write_json_file(dir / "cert_gap.json", certificate_to_json(report.gap_cert));
        write_trace_csv(dir / "trace_robustness.csv", report.rob_cert);
        write_trace_csv(dir / "trace_gap.csv", report.gap_cert);
        const std::string summary = verify_summary(report);
        write_text_file(dir / "summary.txt", summary);
        out << summary << "wrote " << (dir / "report.json").string() << "\n";
        return kExitOk;
    } catch (const UnterminatedError& e) {
        err << "error: " << e.what() << " (" << e.trace.size()
            << " iterations recorded; raise max_iters or loosen epsilon)\n";
        return kExitRunFailure;
    } catch (const Error& e) {
        return run_failure(err, e);
    }
}

int cmd_repeat(const std::filesystem::path& config_path, const CliOptions& opts,
               std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    std::filesystem::path dir;
    std::vector<double> b_values;
    std::size_t runs_per_b = 0;
    try {
        cfg = apply_overrides(load_experiment_config(config_path), opts);
        dir = resolve_out_dir(cfg, opts);
        b_values = opts.b_values.empty() ? cfg.repeat.b_values : opts.b_values;
        runs_per_b = opts.runs_per_b > 0 ? opts.runs_per_b : cfg.repeat.runs_per_b;
        if (runs_per_b < 2) throw ConfigError("runs-per-b: must be at least 2");
        for (double b : b_values)
            if (!(b > 0.0)) throw ConfigError("b-values: values must be positive");
        cfg.repeat.b_values = b_values;
        cfg.repeat.runs_per_b = runs_per_b;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        std::filesystem::create_directories(dir);
        write_materialized(dir, cfg);
        const VerificationConfig vcfg = build_verification(cfg);
        const RepeatabilityResult result = repeatability_study(vcfg, b_values, runs_per_b);

        write_repeat_csv(dir / "repeat.csv", result);
        write_json_file(dir / "repeat_summary.json",
                        json{{"b_values", b_values},
                             {"runs_per_b", runs_per_b},
                             {"completed", result.completed},
                             {"total", result.runs.size()},
                             {"spread", result.spread},
                             {"tolerance", result.tolerance},
                             {"pass", result.pass}});
        out << "repeatability: " << result.completed << "/" << result.runs.size()
            << " runs completed, spread " << format_double(result.spread) << " vs tolerance "
            << format_double(result.tolerance) << " -> " << (result.pass ? "PASS" : "FAIL")
            << "\n"
            << "wrote " << (dir / "repeat.csv").string() << "\n";
        return result.pass ? kExitOk : kExitRepeatFail;
    } catch (const Error& e) {
        return run_failure(err, e);
    }
}

int cmd_oracle(const std::filesystem::path& config_path, const CliOptions& opts,
               std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    std::filesystem::path dir;
    try {
        cfg = apply_overrides(load_experiment_config(config_path), opts);
        if (!cfg.is_builtin_pair()) throw ConfigError("oracle requires builtin pair");
        dir = resolve_out_dir(cfg, opts);
        const OracleBudget budget = oracle_budget(cfg);
        std::size_t total = 1;
        for (std::size_t i = 0; i < cfg.domain.dim(); ++i) {
            if (total > budget.max_grid_points / budget.grid_points_per_dim)
                throw ConfigError("oracle grid exceeds max_grid_points");
            total *= budget.grid_points_per_dim;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        std::filesystem::create_directories(dir);
        write_materialized(dir, cfg);
        const VerificationConfig vcfg = build_verification(cfg);
        const OracleBudget budget = oracle_budget(cfg);
        const OracleEstimate rho = oracle_rho_star(vcfg, budget);
        const OracleEstimate gap = oracle_e_star(vcfg, budget);

        write_json_file(dir / "oracle.json",
                        json{{"rho_star", rho.value},
                             {"e_star", gap.value},
                             {"stderr", json{{"rho_star", rho.std_error},
                                             {"e_star", gap.std_error}}},
                             {"argmin_rho_star", rho.argopt.coords},
                             {"argmax_e_star", gap.argopt.coords},
                             {"grid", json{{"points_per_dim", budget.grid_points_per_dim},
                                           {"rollouts_per_point", budget.rollouts_per_point}}}});
        out << "oracle: rho_star " << format_double(rho.value) << " (stderr "
            << format_double(rho.std_error) << "), e_star " << format_double(gap.value)
            << " (stderr " << format_double(gap.std_error) << ")\n"
            << "wrote " << (dir / "oracle.json").string() << "\n";
        return kExitOk;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        return run_failure(err, e);
    }
}

namespace {

void write_convergence_csv(const std::filesystem::path& path, const BoundCertificate& cert) {
    std::string out = "iteration,F\n";
    for (std::size_t i = 0; i < cert.trace.size(); ++i) {
        out += std::to_string(i + 1);
        out += ",";
        out += format_double(cert.trace[i].F);
        out += "\n";
    }
    write_text_file(path, out);
}

/// Depth-first search for a velocity requirement anywhere in a measure tree.
const json* find_velocity_node(const json& node) {
    if (!node.is_object()) return nullptr;
    if (node.value("op", "") == "velocity_spec") return &node;
    if (auto it = node.find("fn"); it != node.end())
        if (const json* hit = find_velocity_node(*it)) return hit;
    if (auto it = node.find("args"); it != node.end() && it->is_array())
        for (const json& child : *it)
            if (const json* hit = find_velocity_node(child)) return hit;
    return nullptr;
}

void write_velocity_trace_csv(const std::filesystem::path& path, const Signal& signal,
                              const json& node) {
    const auto vx_index = node.value("vx_index", std::size_t{0});
    const double delta_o = node.at("delta_o").get<double>();
    const double delta_s = node.at("delta_s").get<double>();
    const double t_rise = node.value("t_rise", 0.5);
    double v_d = 0.0;
    if (node.contains("v_d"))
        v_d = node.at("v_d").get<double>();
    else
        v_d = signal.samples.front().at(node.at("v_d_index").get<std::size_t>());

    std::string out = "t,vx,band_lo,band_hi\n";
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double t = signal.t0 + static_cast<double>(i) * signal.dt;
        const double band = t < t_rise ? delta_o : delta_s;
        out += format_double(t);
        out += ",";
        out += format_double(signal.samples[i].at(vx_index));
        out += ",";
        out += format_double(v_d - band);
        out += ",";
        out += format_double(v_d + band);
        out += "\n";
    }
    write_text_file(path, out);
}

/// Minimal reader for the repeat.csv this tool writes.
struct RepeatRow {
    double B = 0.0;
    double rho_hat_e = 0.0;
    bool completed = false;
};

std::vector<RepeatRow> read_repeat_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("B,seed,rho_hat_e", 0) != 0)
        throw FormatError(path.string() + ": not a repeatability CSV");
    std::vector<RepeatRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string b, seed, rho, iters, status;
        if (!std::getline(fields, b, ',') || !std::getline(fields, seed, ',') ||
            !std::getline(fields, rho, ',') || !std::getline(fields, iters, ',') ||
            !std::getline(fields, status))
            throw FormatError(path.string() + ": malformed row '" + line + "'");
        RepeatRow row;
        row.B = std::stod(b);
        row.completed = status == "ok";
        row.rho_hat_e = row.completed ? std::stod(rho) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

} // namespace

int cmd_plotdata(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        const auto cfg_path = run_dir / "config.materialized.json";
        if (!std::filesystem::exists(cfg_path))
            throw ConfigError(cfg_path.string() + ": missing (not a completed run directory)");
        cfg = load_experiment_config(cfg_path);

        const auto report_path = run_dir / "report.json";
        const auto repeat_path = run_dir / "repeat.csv";
        const bool have_report = std::filesystem::exists(report_path);
        const bool have_repeat = std::filesystem::exists(repeat_path);
        if (!have_report && !have_repeat)
            throw ConfigError(run_dir.string() +
                              ": missing artifacts (need report.json or repeat.csv)");

        std::vector<std::string> written;
        if (have_report) {
            const VerificationReport report =
                report_from_json(read_json_file(report_path));
            write_convergence_csv(run_dir / "plot_convergence_robustness.csv", report.rob_cert);
            write_convergence_csv(run_dir / "plot_convergence_gap.csv", report.gap_cert);
            written.push_back("plot_convergence_robustness.csv");
            written.push_back("plot_convergence_gap.csv");

            const json measure_json = cfg.measure.to_json();
            const json* vel = find_velocity_node(measure_json);
            if (vel && cfg.is_builtin_pair()) {
                const VerificationConfig vcfg = build_verification(cfg);
                const SeededRng rng =
                    SeededRng(cfg.master_seed, 0).derive(seed_streams::kPlotTrace);
                const Signal trace = vcfg.pair.sim_sys->rollout(report.rob_cert.argbest, rng);
                write_velocity_trace_csv(run_dir / "plot_velocity_trace.csv", trace, *vel);
                written.push_back("plot_velocity_trace.csv");
            }
        }
        if (have_repeat) {
            const auto rows = read_repeat_rows(repeat_path);
            std::string scatter = "B,rho_hat_e\n";
            for (const RepeatRow& row : rows) {
                if (!row.completed) continue;
                scatter += format_double(row.B);
                scatter += ",";
                scatter += format_double(row.rho_hat_e);
                scatter += "\n";
            }
            write_text_file(run_dir / "plot_b_scatter.csv", scatter);
            written.push_back("plot_b_scatter.csv");
        }
        out << "wrote";
        for (const std::string& name : written) out << " " << name;
        out << " in " << run_dir.string() << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        return run_failure(err, e);
    }
}

} // namespace simbound
