#include "simbound/subprocess.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace simbound {

using nlohmann::json;

void SubprocessConfig::validate() const {
    if (command.empty()) throw ParameterError("subprocess command must be non-empty");
    if (timeout_ms <= 0) throw ParameterError("timeout_ms must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive and finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be positive and finite");
}

namespace {

void ignore_sigpipe_once() {
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

std::chrono::steady_clock::time_point deadline_after(int timeout_ms) {
    return std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
}

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    return left > 0 ? static_cast<int>(left) : 0;
}

} // namespace

struct SubprocessAdapter::Child {
    pid_t pid = -1;
    int to_child = -1;   // our write end of the child's stdin
    int from_child = -1; // our read end of the child's stdout
    std::string buffer;  // bytes read but not yet consumed as a line
    bool dead = false;

    explicit Child(const std::vector<std::string>& command) {
        ignore_sigpipe_once();
        int in_pipe[2];
        int out_pipe[2];
        if (pipe(in_pipe) != 0) throw AdapterError("failed to create a pipe");
        if (pipe(out_pipe) != 0) {
            close(in_pipe[0]);
            close(in_pipe[1]);
            throw AdapterError("failed to create a pipe");
        }
        pid = fork();
        if (pid < 0) {
            for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
            throw AdapterError("fork failed");
        }
        if (pid == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
            std::vector<char*> argv;
            argv.reserve(command.size() + 1);
            for (const std::string& a : command) argv.push_back(const_cast<char*>(a.c_str()));
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child = in_pipe[1];
        from_child = out_pipe[0];
    }

    ~Child() { shutdown(); }

    void shutdown() {
        if (to_child >= 0) {
            close(to_child);
            to_child = -1;
        }
        if (from_child >= 0) {
            close(from_child);
            from_child = -1;
        }
        if (pid > 0) {
            // Give the child a moment to exit on EOF, then escalate.
            for (int attempt = 0; attempt < 2; ++attempt) {
                for (int i = 0; i < 50; ++i) {
                    int status = 0;
                    const pid_t r = waitpid(pid, &status, WNOHANG);
                    if (r == pid || r < 0) {
                        pid = -1;
                        return;
                    }
                    usleep(2000);
                }
                kill(pid, attempt == 0 ? SIGTERM : SIGKILL);
            }
            int status = 0;
            waitpid(pid, &status, 0);
            pid = -1;
        }
    }

    void send_line(const std::string& line) {
        if (dead) throw AdapterError("simulator process is no longer running");
        std::string payload = line;
        payload.push_back('\n');
        std::size_t off = 0;
        while (off < payload.size()) {
            const ssize_t n = write(to_child, payload.data() + off, payload.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                dead = true;
                throw AdapterError(std::string("write to simulator failed: ") +
                                   std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(std::chrono::steady_clock::time_point deadline) {
        while (true) {
            const std::size_t nl = buffer.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return line;
            }
            struct pollfd pfd{from_child, POLLIN, 0};
            const int left = remaining_ms(deadline);
            if (left == 0) {
                dead = true;
                throw AdapterError("simulator did not reply within the timeout");
            }
            const int pr = poll(&pfd, 1, left);
            if (pr < 0) {
                if (errno == EINTR) continue;
                dead = true;
                throw AdapterError(std::string("poll failed: ") + std::strerror(errno));
            }
            if (pr == 0) {
                dead = true;
                throw AdapterError("simulator did not reply within the timeout");
            }
            char chunk[4096];
            const ssize_t n = read(from_child, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                dead = true;
                throw AdapterError(std::string("read from simulator failed: ") +
                                   std::strerror(errno));
            }
            if (n == 0) {
                dead = true;
                if (!buffer.empty())
                    throw ProtocolError("simulator reply truncated mid-line");
                throw AdapterError("simulator closed its output");
            }
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }

    json request(const json& req, int timeout_ms) {
        const auto deadline = deadline_after(timeout_ms);
        send_line(req.dump());
        const std::string line = read_line(deadline);
        try {
            return json::parse(line);
        } catch (const json::exception&) {
            throw ProtocolError("simulator reply is not valid JSON");
        }
    }
};

namespace {

json expect_ok(const json& reply) {
    if (!reply.is_object() || !reply.contains("status") || !reply.at("status").is_string())
        throw ProtocolError("simulator reply lacks a status field");
    const std::string status = reply.at("status").get<std::string>();
    if (status == "error") {
        std::string msg = "simulator reported an error";
        if (reply.contains("msg") && reply.at("msg").is_string())
            msg += ": " + reply.at("msg").get<std::string>();
        throw AdapterError(msg);
    }
    if (status != "ok") throw ProtocolError("simulator status must be 'ok' or 'error'");
    return reply;
}

Signal parse_rollout_reply(const json& reply, double want_dt, std::size_t want_samples,
                           std::size_t want_dim) {
    expect_ok(reply);
    if (!reply.contains("t0") || !reply.at("t0").is_number() || !reply.contains("dt") ||
        !reply.at("dt").is_number() || !reply.contains("samples") ||
        !reply.at("samples").is_array())
        throw ProtocolError("rollout reply must carry numeric t0, dt and a samples array");
    const double t0 = reply.at("t0").get<double>();
    const double dt = reply.at("dt").get<double>();
    if (!std::isfinite(t0)) throw ProtocolError("rollout reply t0 must be finite");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ProtocolError("rollout reply needs increasing timestamps (dt > 0)");
    if (std::abs(dt - want_dt) > 1e-9 * std::max(1.0, want_dt))
        throw ProtocolError("rollout reply dt differs from the requested dt");
    const json& samples = reply.at("samples");
    if (samples.size() != want_samples)
        throw ProtocolError("rollout reply sample count does not match the horizon");
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const json& row : samples) {
        if (!row.is_array() || row.size() != want_dim)
            throw ProtocolError("rollout reply sample dimension is not fixed");
        std::vector<double> r;
        r.reserve(row.size());
        for (const json& v : row) {
            if (!v.is_number()) throw ProtocolError("rollout reply samples must be numeric");
            r.push_back(v.get<double>());
        }
        rows.push_back(std::move(r));
    }
    return Signal(t0, dt, std::move(rows));
}

} // namespace

SubprocessAdapter::SubprocessAdapter(SystemSide side, SubprocessConfig cfg)
    : SystemAdapter(SystemKind::Subprocess, side, cfg.horizon, cfg.dt), cfg_(std::move(cfg)) {
    cfg_.validate();
    child_ = std::make_unique<Child>(cfg_.command);
    const json reply = expect_ok(child_->request(json{{"cmd", "hello"}}, cfg_.timeout_ms));
    if (!reply.contains("state_dim") || !reply.at("state_dim").is_number_integer() ||
        !reply.contains("d_dim") || !reply.at("d_dim").is_number_integer())
        throw ProtocolError("hello reply must carry integer state_dim and d_dim");
    const long long sd = reply.at("state_dim").get<long long>();
    const long long dd = reply.at("d_dim").get<long long>();
    if (sd < 1 || dd < 1) throw ProtocolError("hello reply dimensions must be positive");
    state_dim_ = static_cast<std::size_t>(sd);
    d_dim_ = static_cast<std::size_t>(dd);
}

SubprocessAdapter::~SubprocessAdapter() = default;

Signal SubprocessAdapter::rollout(const TestPoint& d, SeededRng rng) const {
    check_test_point(d);
    const std::uint64_t seed = rng.next_u64();
    const json req{{"cmd", "rollout"},
                   {"d", d.coords},
                   {"seed", seed},
                   {"horizon", horizon()},
                   {"dt", dt()}};
    std::lock_guard<std::mutex> lock(mutex_);
    if (!child_ || child_->dead) throw AdapterError("simulator process is no longer running");
    const json reply = child_->request(req, cfg_.timeout_ms);
    return parse_rollout_reply(reply, dt(), steps() + 1, state_dim_);
}

Signal subprocess_roundtrip(const SubprocessConfig& cfg, const TestPoint& d,
                            std::uint64_t seed) {
    SubprocessAdapter adapter(SystemSide::Simulator, cfg);
    return adapter.rollout(d, SeededRng(seed, 0));
}

} // namespace simbound
