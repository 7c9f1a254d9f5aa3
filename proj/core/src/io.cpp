#include "simbound/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace simbound {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write file: " + path.string());
    out << content;
    if (!out) throw FormatError("write failed: " + path.string());
}

namespace {

std::pair<std::size_t, std::size_t> line_col_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" +
                          std::to_string(col) + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& s, const std::filesystem::path& path,
                          std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": not a number: '" + s + "'");
    return v;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw FormatError(path.string() + ": empty CSV");
    return rows;
}

} // namespace

void write_signal_csv(const std::filesystem::path& path, const Signal& signal) {
    std::string out = "t";
    for (std::size_t j = 0; j < signal.state_dim(); ++j)
        out += ",x" + std::to_string(j + 1);
    out += "\n";
    for (std::size_t i = 0; i < signal.size(); ++i) {
        out += format_double(signal.t0 + static_cast<double>(i) * signal.dt);
        for (double v : signal.samples[i]) {
            out += ",";
            out += format_double(v);
        }
        out += "\n";
    }
    write_text_file(path, out);
}

Signal read_signal_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path);
    if (rows.front().empty() || rows.front()[0] != "t")
        throw FormatError(path.string() + ": expected a 't,x1,...' header");
    const std::size_t dim = rows.front().size() - 1;
    if (dim == 0) throw FormatError(path.string() + ": signal CSV needs state columns");
    if (rows.size() < 3)
        throw FormatError(path.string() + ": signal CSV needs at least two samples");

    std::vector<double> times;
    std::vector<std::vector<double>> samples;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != dim + 1)
            throw FormatError(path.string() + ":" + std::to_string(r + 1) +
                              ": inconsistent column count");
        times.push_back(parse_double_field(rows[r][0], path, r + 1));
        std::vector<double> s;
        s.reserve(dim);
        for (std::size_t j = 1; j <= dim; ++j)
            s.push_back(parse_double_field(rows[r][j], path, r + 1));
        samples.push_back(std::move(s));
    }
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw FormatError(path.string() + ": time must be strictly increasing");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (!(step > 0.0))
            throw FormatError(path.string() + ": time must be strictly increasing");
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw FormatError(path.string() + ": time step must be constant");
    }
    return Signal(times[0], dt, std::move(samples));
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    data.validate();
    const std::size_t dim = data.size() > 0 ? data.points.front().dim() : 0;
    std::string out;
    for (std::size_t j = 0; j < dim; ++j) out += "z" + std::to_string(j + 1) + ",";
    out += "y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double c : data.points[i].coords) {
            out += format_double(c);
            out += ",";
        }
        out += format_double(data.observations[i]);
        out += "\n";
    }
    write_text_file(path, out);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path);
    if (rows.front().empty() || rows.front().back() != "y")
        throw FormatError(path.string() + ": expected a 'z1,...,y' header");
    const std::size_t dim = rows.front().size() - 1;
    Dataset data;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != dim + 1)
            throw FormatError(path.string() + ":" + std::to_string(r + 1) +
                              ": inconsistent column count");
        TestPoint z;
        for (std::size_t j = 0; j < dim; ++j)
            z.coords.push_back(parse_double_field(rows[r][j], path, r + 1));
        data.append(z, parse_double_field(rows[r][dim], path, r + 1));
    }
    return data;
}

namespace {

json point_to_json(const TestPoint& p) { return json(p.coords); }

TestPoint point_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("point must be a JSON array");
    TestPoint p;
    for (const json& v : j) {
        if (!v.is_number()) throw FormatError("point coordinates must be numbers");
        p.coords.push_back(v.get<double>());
    }
    return p;
}

json params_to_json(const BoParams& p) {
    return json{{"B", p.B},
                {"R", p.R},
                {"delta", p.delta},
                {"epsilon", p.epsilon},
                {"max_iters", p.max_iters},
                {"acquisition_restarts", p.acquisition_restarts},
                {"lambda", p.lambda}};
}

BoParams params_from_json(const json& j) {
    BoParams p;
    p.B = j.at("B").get<double>();
    p.R = j.at("R").get<double>();
    p.delta = j.at("delta").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.max_iters = j.at("max_iters").get<std::size_t>();
    p.acquisition_restarts = j.at("acquisition_restarts").get<std::size_t>();
    p.lambda = j.at("lambda").get<double>();
    return p;
}

json kernel_to_json(const KernelSpec& k) {
    return json{{"family", to_string(k.family)},
                {"lengthscales", k.lengthscales},
                {"signal_variance", k.signal_variance}};
}

KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    k.family = kernel_family_from_string(j.at("family").get<std::string>());
    k.lengthscales = j.at("lengthscales").get<std::vector<double>>();
    k.signal_variance = j.at("signal_variance").get<double>();
    return k;
}

json noise_to_json(const NoiseDiagnostics& d) {
    return json{{"mean_std_error", d.mean_std_error},
                {"max_std_error", d.max_std_error},
                {"queries", d.queries}};
}

NoiseDiagnostics noise_from_json(const json& j) {
    NoiseDiagnostics d;
    d.mean_std_error = j.at("mean_std_error").get<double>();
    d.max_std_error = j.at("max_std_error").get<double>();
    d.queries = j.at("queries").get<std::size_t>();
    return d;
}

} // namespace

json certificate_to_json(const BoundCertificate& cert) {
    json trace = json::array();
    for (const IterationRecord& rec : cert.trace)
        trace.push_back(json{{"z", point_to_json(rec.z)},
                             {"y", rec.y},
                             {"beta", rec.beta},
                             {"F", rec.F}});
    json points = json::array();
    for (const TestPoint& p : cert.final_dataset.points) points.push_back(point_to_json(p));
    return json{{"bound", cert.bound},
                {"epsilon", cert.epsilon},
                {"delta", cert.delta},
                {"iterations", cert.iterations},
                {"argbest", point_to_json(cert.argbest)},
                {"direction",
                 cert.direction == BoundDirection::LowerMin ? "lower-min" : "upper-max"},
                {"trace", std::move(trace)},
                {"final_dataset",
                 json{{"points", std::move(points)},
                      {"observations", cert.final_dataset.observations}}},
                {"params", params_to_json(cert.params)},
                {"kernel", kernel_to_json(cert.kernel)}};
}

BoundCertificate certificate_from_json(const json& j) {
    try {
        BoundCertificate cert;
        cert.bound = j.at("bound").get<double>();
        cert.epsilon = j.at("epsilon").get<double>();
        cert.delta = j.at("delta").get<double>();
        cert.iterations = j.at("iterations").get<std::size_t>();
        cert.argbest = point_from_json(j.at("argbest"));
        const std::string dir = j.at("direction").get<std::string>();
        if (dir == "lower-min")
            cert.direction = BoundDirection::LowerMin;
        else if (dir == "upper-max")
            cert.direction = BoundDirection::UpperMax;
        else
            throw FormatError("unknown certificate direction: " + dir);
        for (const json& rec : j.at("trace")) {
            IterationRecord r;
            r.z = point_from_json(rec.at("z"));
            r.y = rec.at("y").get<double>();
            r.beta = rec.at("beta").get<double>();
            r.F = rec.at("F").get<double>();
            cert.trace.push_back(std::move(r));
        }
        const json& ds = j.at("final_dataset");
        for (const json& p : ds.at("points"))
            cert.final_dataset.points.push_back(point_from_json(p));
        cert.final_dataset.observations = ds.at("observations").get<std::vector<double>>();
        cert.final_dataset.validate();
        cert.params = params_from_json(j.at("params"));
        cert.kernel = kernel_from_json(j.at("kernel"));
        return cert;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed certificate JSON: ") + e.what());
    }
}

void write_trace_csv(const std::filesystem::path& path, const BoundCertificate& cert) {
    const std::size_t dim = cert.argbest.dim();
    std::string out = "iteration";
    for (std::size_t j = 0; j < dim; ++j) out += ",z" + std::to_string(j + 1);
    out += ",y,beta,F\n";
    for (std::size_t i = 0; i < cert.trace.size(); ++i) {
        out += std::to_string(i + 1);
        for (double c : cert.trace[i].z.coords) {
            out += ",";
            out += format_double(c);
        }
        out += ",";
        out += format_double(cert.trace[i].y);
        out += ",";
        out += format_double(cert.trace[i].beta);
        out += ",";
        out += format_double(cert.trace[i].F);
        out += "\n";
    }
    write_text_file(path, out);
}

json report_to_json(const VerificationReport& report) {
    return json{{"schema_version", 1},
                {"master_seed", report.master_seed},
                {"rho_hat_e", report.rho_hat_e},
                {"e_e", report.e_e},
                {"e_e_floored", report.e_e_floored},
                {"rho_e", report.rho_e},
                {"epsilon", report.epsilon},
                {"confidence", report.confidence},
                {"certificates",
                 json{{"robustness", certificate_to_json(report.rob_cert)},
                      {"gap", certificate_to_json(report.gap_cert)}}},
                {"noise",
                 json{{"robustness", noise_to_json(report.rob_noise)},
                      {"gap", noise_to_json(report.gap_noise)}}}};
}

VerificationReport report_from_json(const json& j) {
    try {
        VerificationReport r;
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.rho_hat_e = j.at("rho_hat_e").get<double>();
        r.e_e = j.at("e_e").get<double>();
        r.e_e_floored = j.at("e_e_floored").get<double>();
        r.rho_e = j.at("rho_e").get<double>();
        r.epsilon = j.at("epsilon").get<double>();
        r.confidence = j.at("confidence").get<double>();
        r.rob_cert = certificate_from_json(j.at("certificates").at("robustness"));
        r.gap_cert = certificate_from_json(j.at("certificates").at("gap"));
        r.rob_noise = noise_from_json(j.at("noise").at("robustness"));
        r.gap_noise = noise_from_json(j.at("noise").at("gap"));
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed report JSON: ") + e.what());
    }
}

void write_repeat_csv(const std::filesystem::path& path, const RepeatabilityResult& result) {
    std::string out = "B,seed,rho_hat_e,iterations,status\n";
    for (const RepeatabilityRun& run : result.runs) {
        out += format_double(run.B);
        out += ",";
        out += std::to_string(run.seed);
        out += ",";
        out += run.completed ? format_double(run.rho_hat_e) : std::string("nan");
        out += ",";
        out += std::to_string(run.iterations);
        out += ",";
        out += run.status;
        out += "\n";
    }
    write_text_file(path, out);
}

} // namespace simbound
