#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "simbound/bo.hpp"
#include "simbound/verifier.hpp"

namespace simbound {

/// Shortest text that round-trips the double ("%.17g").
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Parse with a line:column anchor in error messages.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Two-space indent, sorted keys, trailing newline; byte-deterministic.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// Signal CSV: header `t,x1,...,xn`, one row per sample. Reading validates
/// a strictly increasing, constant time step.
void write_signal_csv(const std::filesystem::path& path, const Signal& signal);
Signal read_signal_csv(const std::filesystem::path& path);

/// Dataset CSV: header `z1,...,zd,y`.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

nlohmann::json certificate_to_json(const BoundCertificate& cert);
BoundCertificate certificate_from_json(const nlohmann::json& j);

/// Trace CSV: header `iteration,z1,...,zd,y,beta,F`.
void write_trace_csv(const std::filesystem::path& path, const BoundCertificate& cert);

/// Report JSON without provenance; the caller may attach a "config" entry.
nlohmann::json report_to_json(const VerificationReport& report);
VerificationReport report_from_json(const nlohmann::json& j);

/// Repeatability CSV: header `B,seed,rho_hat_e,iterations,status`.
void write_repeat_csv(const std::filesystem::path& path, const RepeatabilityResult& result);

} // namespace simbound
