#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "simbound/systems.hpp"

namespace simbound {

/// Launch description for an external simulator speaking the line-delimited
/// JSON wire protocol: one JSON document per line over stdin/stdout,
/// flushed per message. Handshake {"cmd":"hello"} ->
/// {"status":"ok","state_dim":n,"d_dim":m}; rollouts
/// {"cmd":"rollout","d":[...],"seed":N,"horizon":H,"dt":DT} ->
/// {"status":"ok","t0":0.0,"dt":DT,"samples":[[...],...]} or
/// {"status":"error","msg":"..."}.
struct SubprocessConfig {
    std::vector<std::string> command; // argv; command[0] resolved via PATH
    int timeout_ms = 5000;
    double horizon = 1.0;
    double dt = 0.1;

    void validate() const;
};

/// Adapter around one child process. Requests are serialized per child;
/// protocol violations raise ProtocolError, timeouts and child death raise
/// AdapterError. The rollout seed sent over the wire is the first 64-bit
/// draw of the rng argument, so replays are exact.
class SubprocessAdapter final : public SystemAdapter {
public:
    SubprocessAdapter(SystemSide side, SubprocessConfig cfg);
    ~SubprocessAdapter() override;

    std::size_t state_dim() const override { return state_dim_; }
    std::size_t d_dim() const override { return d_dim_; }
    Signal rollout(const TestPoint& d, SeededRng rng) const override;

private:
    struct Child;

    SubprocessConfig cfg_;
    std::size_t state_dim_ = 0;
    std::size_t d_dim_ = 0;
    mutable std::mutex mutex_;
    mutable std::unique_ptr<Child> child_;
};

/// One-shot convenience: spawn, handshake, run a single rollout, shut down.
Signal subprocess_roundtrip(const SubprocessConfig& cfg, const TestPoint& d, std::uint64_t seed);

} // namespace simbound
