#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "simbound/cli.hpp"

namespace {

bool parse_b_values(const std::string& text, std::vector<double>& out) {
    std::istringstream in(text);
    std::string field;
    while (std::getline(in, field, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            if (used != field.size()) return false;
            out.push_back(v);
        } catch (const std::exception&) {
            return false;
        }
    }
    return !out.empty();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simbound: probabilistic robustness bounds from simulator and gap certificates"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string b_values_text;
    std::string run_dir;
    std::size_t runs_per_b = 0;
    std::size_t jobs = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides the config's out_dir)");
        cmd->add_option("--jobs", jobs, "worker threads (overrides config and SIMBOUND_JOBS)");
    };

    CLI::App* verify =
        app.add_subcommand("verify", "bound simulator robustness and the sim-vs-real gap, "
                                     "then combine them into a certified bound");
    add_common(verify);

    CLI::App* repeat = app.add_subcommand("repeat", "repeatability study across B values");
    add_common(repeat);
    repeat->add_option("--b-values", b_values_text, "comma-separated B sweep");
    repeat->add_option("--runs-per-b", runs_per_b, "runs per B value (at least 2)");

    CLI::App* oracle =
        app.add_subcommand("oracle", "brute-force grid ground truth (builtin pairs only)");
    add_common(oracle);

    CLI::App* plotdata = app.add_subcommand("plotdata", "emit plot CSVs for a run directory");
    plotdata->add_option("dir", run_dir, "completed run directory")->required();

    CLI11_PARSE(app, argc, argv);

    simbound::CliOptions opts;
    opts.out_dir = out_dir;
    opts.runs_per_b = runs_per_b;
    opts.jobs = jobs;
    if (!b_values_text.empty() && !parse_b_values(b_values_text, opts.b_values)) {
        std::cerr << "error: --b-values: expected a comma-separated list of numbers\n";
        return simbound::kExitConfig;
    }

    if (verify->parsed()) return simbound::cmd_verify(config_path, opts, std::cout, std::cerr);
    if (repeat->parsed()) return simbound::cmd_repeat(config_path, opts, std::cout, std::cerr);
    if (oracle->parsed()) return simbound::cmd_oracle(config_path, opts, std::cout, std::cerr);
    return simbound::cmd_plotdata(run_dir, std::cout, std::cerr);
}
