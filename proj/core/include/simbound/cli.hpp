#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace simbound {

/// Command-line overrides shared by the run commands. Empty/zero fields
/// fall back to the config document (and, for jobs, to SIMBOUND_JOBS).
struct CliOptions {
    std::string out_dir;
    std::vector<double> b_values;
    std::size_t runs_per_b = 0;
    std::size_t jobs = 0;
};

/// Exit codes shared by every command: 0 = completed (a negative certified
/// bound is a finding, not a failure), 2 = configuration error, 3 = run
/// failure, 4 = repeatability FAIL.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRunFailure = 3;
inline constexpr int kExitRepeatFail = 4;

int cmd_verify(const std::filesystem::path& config_path, const CliOptions& opts,
               std::ostream& out, std::ostream& err);

int cmd_repeat(const std::filesystem::path& config_path, const CliOptions& opts,
               std::ostream& out, std::ostream& err);

int cmd_oracle(const std::filesystem::path& config_path, const CliOptions& opts,
               std::ostream& out, std::ostream& err);

/// Reads a completed run directory (cmd_verify and/or cmd_repeat outputs)
/// and emits tidy plot CSVs next to them.
int cmd_plotdata(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

} // namespace simbound
