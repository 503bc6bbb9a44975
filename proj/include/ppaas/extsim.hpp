#pragma once

#include <condition_variable>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "ppaas/envsim.hpp"

#include "json.hpp"

namespace ppaas {

// Bridges CircuitModel to a child process speaking newline-delimited JSON on
// its standard streams. The child must greet with
//   {"hello": {"L": <int>, "M": <int>, "metrics": [<name>...]}}
// and then answer each request {"id", "params", "corner"} with either
// {"id", "metrics": {...}} or {"id", "error": "..."}. Responses may arrive
// in any order; they are matched by id. Parameters are sent as physical
// values. One session drives one child; concurrent simulate() calls are safe
// and pipeline their requests.
class ExternalSimulatorModel final : public CircuitModel {
public:
    struct Options {
        std::string command;
        std::vector<std::string> args;
        SpecSchema schema;        // metric names must match the handshake
        ParamSpace param_space;
        double timeout_s = 30.0;  // per-response wait
    };

    explicit ExternalSimulatorModel(Options opts);
    ~ExternalSimulatorModel() override;

    ExternalSimulatorModel(const ExternalSimulatorModel&) = delete;
    ExternalSimulatorModel& operator=(const ExternalSimulatorModel&) = delete;

    Vec simulate(const DesignState& state, const CornerId& corner) const override;

    int n_params() const override { return opts_.param_space.size(); }
    int n_metrics() const override { return opts_.schema.size(); }
    const SpecSchema& schema() const override { return opts_.schema; }
    const ParamSpace& params() const override { return opts_.param_space; }

private:
    void spawn_child();
    void write_line(const std::string& line) const;
    // Blocking buffered line read honoring the timeout; throws on EOF.
    std::string read_line() const;
    Vec await_response(std::uint64_t id) const;
    void shutdown();

    Options opts_;
    int child_pid_ = -1;
    int to_child_ = -1;    // child's stdin
    int from_child_ = -1;  // child's stdout

    mutable std::mutex write_mu_;
    mutable std::mutex read_mu_;
    mutable std::condition_variable read_cv_;
    mutable bool reader_active_ = false;
    mutable bool dead_ = false;
    mutable std::string dead_reason_;
    mutable std::map<std::uint64_t, nlohmann::json> stash_;
    mutable std::string line_buf_;
    mutable std::uint64_t next_id_ = 1;
};

}  // namespace ppaas
