// Reference server for the line-delimited JSON rollout protocol, used as a
// test double. The default mode integrates a small first-order velocity
// plant; the fault modes exercise every client error path.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <thread>

#include "CLI11.hpp"

using nlohmann::json;

namespace {

struct StubOptions {
    std::string mode = "plant";
    std::size_t d_dim = 1;
    double tau = 0.2;
    double noise_std = 0.0;
    int sleep_ms = 10000;
    bool hello_bad = false;
};

void reply_raw(const std::string& line) { std::cout << line << "\n" << std::flush; }

void reply(const json& j) { reply_raw(j.dump()); }

json plant_rollout(const StubOptions& opts, const json& req) {
    const double horizon = req.at("horizon").get<double>();
    const double dt = req.at("dt").get<double>();
    const std::uint64_t seed = req.at("seed").get<std::uint64_t>();
    const auto& d = req.at("d");
    const double v_cmd = d.empty() ? 0.0 : d.at(0).get<double>();

    std::mt19937_64 eng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double w = opts.noise_std > 0.0 ? opts.noise_std * gauss(eng) : 0.0;
    const double target = v_cmd + w;

    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    double v = 0.0;
    json samples = json::array();
    samples.push_back(json::array({v, v_cmd}));
    for (std::size_t i = 0; i < steps; ++i) {
        v += dt * (target - v) / opts.tau;
        samples.push_back(json::array({v, v_cmd}));
    }
    return json{{"status", "ok"}, {"t0", 0.0}, {"dt", dt}, {"samples", std::move(samples)}};
}

json fixed_rollout(const json& req) {
    const double dt = req.at("dt").get<double>();
    return json{{"status", "ok"},
                {"t0", 0.0},
                {"dt", dt},
                {"samples", json::array({json::array({0.0, 0.0}), json::array({0.5, 1.0}),
                                         json::array({1.0, 2.0})})}};
}

int serve(const StubOptions& opts) {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json req;
        try {
            req = json::parse(line);
        } catch (const json::exception&) {
            reply(json{{"status", "error"}, {"msg", "unparseable request"}});
            continue;
        }
        const std::string cmd = req.value("cmd", "");
        if (cmd == "hello") {
            if (opts.hello_bad) {
                reply_raw("mangled handshake");
            } else {
                reply(json{{"status", "ok"},
                           {"state_dim", 2},
                           {"d_dim", opts.d_dim}});
            }
            continue;
        }
        if (cmd != "rollout") {
            reply(json{{"status", "error"}, {"msg", "unknown cmd '" + cmd + "'"}});
            continue;
        }

        if (opts.mode == "plant") {
            reply(plant_rollout(opts, req));
        } else if (opts.mode == "fixed") {
            reply(fixed_rollout(req));
        } else if (opts.mode == "error") {
            reply(json{{"status", "error"}, {"msg", "synthetic failure"}});
        } else if (opts.mode == "malformed") {
            reply_raw("this is not a json document");
        } else if (opts.mode == "truncate") {
            std::cout << R"({"status":"ok","t0":0.0,"dt":0.1,"samp)" << std::flush;
            return 0;
        } else if (opts.mode == "die") {
            return 0;
        } else if (opts.mode == "sleep") {
            std::this_thread::sleep_for(std::chrono::milliseconds(opts.sleep_ms));
            reply(plant_rollout(opts, req));
        } else if (opts.mode == "bad-dt") {
            json r = plant_rollout(opts, req);
            r["dt"] = r["dt"].get<double>() * 2.0;
            reply(r);
        } else if (opts.mode == "negative-dt") {
            json r = plant_rollout(opts, req);
            r["dt"] = -r["dt"].get<double>();
            reply(r);
        } else if (opts.mode == "short") {
            json r = plant_rollout(opts, req);
            r["samples"].erase(r["samples"].size() - 1);
            reply(r);
        } else if (opts.mode == "ragged") {
            json r = plant_rollout(opts, req);
            r["samples"].at(1).push_back(0.0);
            reply(r);
        } else {
            reply(json{{"status", "error"}, {"msg", "unknown stub mode"}});
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    StubOptions opts;
    CLI::App app{"sim_stub: wire-protocol test double"};
    app.add_option("--mode", opts.mode,
                   "plant|fixed|error|malformed|truncate|die|sleep|bad-dt|negative-dt|short|ragged");
    app.add_option("--d-dim", opts.d_dim, "reported test-point dimension");
    app.add_option("--tau", opts.tau, "plant time constant");
    app.add_option("--noise", opts.noise_std, "plant target noise std");
    app.add_option("--sleep-ms", opts.sleep_ms, "delay for --mode sleep");
    app.add_flag("--hello-bad", opts.hello_bad, "reply garbage to the handshake");
    CLI11_PARSE(app, argc, argv);
    return serve(opts);
}
