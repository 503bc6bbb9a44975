#include "ppaas/extsim.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

extern char** environ;

namespace ppaas {

using nlohmann::json;

ExternalSimulatorModel::ExternalSimulatorModel(Options opts) : opts_(std::move(opts)) {
    // A dead child must surface as EPIPE on write, not kill the process.
    static const bool sigpipe_ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;
    if (opts_.command.empty()) throw SimulationError("adapter command is empty");
    if (opts_.schema.size() < 1 || opts_.param_space.size() < 1)
        throw SimulationError("adapter needs a schema and a parameter space");
    spawn_child();

    json hello;
    try {
        hello = json::parse(read_line());
    } catch (const json::exception& e) {
        shutdown();
        throw SimulationError(std::string("adapter handshake is not JSON: ") + e.what());
    }
    if (!hello.contains("hello")) {
        shutdown();
        throw SimulationError("adapter did not open with a hello line");
    }
    const auto& h = hello["hello"];
    const int L = h.at("L").get<int>(), M = h.at("M").get<int>();
    if (L != opts_.param_space.size() || M != opts_.schema.size()) {
        shutdown();
        throw SimulationError("adapter dimensions disagree with the configured schema");
    }
    const auto names = h.at("metrics").get<std::vector<std::string>>();
    for (int j = 0; j < opts_.schema.size(); ++j) {
        if (j >= static_cast<int>(names.size()) || names[static_cast<std::size_t>(j)] !=
                                                       opts_.schema.spec(j).name) {
            shutdown();
            throw SimulationError("adapter metric names disagree with the configured schema");
        }
    }
}

ExternalSimulatorModel::~ExternalSimulatorModel() { shutdown(); }

void ExternalSimulatorModel::spawn_child() {
    int in_pipe[2], out_pipe[2];  // in: parent -> child, out: child -> parent
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw SimulationError("pipe creation failed");

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

    std::vector<std::string> argv_store;
    argv_store.push_back(opts_.command);
    for (const auto& a : opts_.args) argv_store.push_back(a);
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_t pid = -1;
    const int rc = posix_spawnp(&pid, opts_.command.c_str(), &actions, nullptr, argv.data(),
                                environ);
    posix_spawn_file_actions_destroy(&actions);
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (rc != 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        throw SimulationError(std::string("failed to start adapter: ") + std::strerror(rc));
    }
    child_pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

void ExternalSimulatorModel::write_line(const std::string& line) const {
    std::string payload = line;
    payload.push_back('\n');
    std::size_t off = 0;
    while (off < payload.size()) {
        const ssize_t n = ::write(to_child_, payload.data() + off, payload.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SimulationError(std::string("adapter write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string ExternalSimulatorModel::read_line() const {
    for (;;) {
        const auto nl = line_buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = line_buf_.substr(0, nl);
            line_buf_.erase(0, nl + 1);
            return line;
        }
        struct pollfd pfd{from_child_, POLLIN, 0};
        const int pr = ::poll(&pfd, 1, static_cast<int>(opts_.timeout_s * 1000.0));
        if (pr == 0) throw SimulationError("adapter response timed out");
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw SimulationError(std::string("adapter poll failed: ") + std::strerror(errno));
        }
        char buf[4096];
        const ssize_t n = ::read(from_child_, buf, sizeof buf);
        if (n == 0) throw SimulationError("adapter closed its output stream");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SimulationError(std::string("adapter read failed: ") + std::strerror(errno));
        }
        line_buf_.append(buf, static_cast<std::size_t>(n));
    }
}

Vec ExternalSimulatorModel::simulate(const DesignState& state, const CornerId& corner) const {
    const Vec phys = opts_.param_space.to_physical(state.x);
    std::uint64_t id;
    {
        std::lock_guard<std::mutex> wl(write_mu_);
        if (dead_) throw SimulationError(dead_reason_);
        id = next_id_++;
        json req;
        req["id"] = id;
        json params = json::object();
        for (int i = 0; i < opts_.param_space.size(); ++i)
            params[opts_.param_space.def(i).name] = phys[i];
        req["params"] = std::move(params);
        req["corner"] = {{"process", corner.process},
                         {"vdd_scale", corner.vdd_scale},
                         {"temp_c", corner.temp_c}};
        write_line(req.dump());
    }
    return await_response(id);
}

Vec ExternalSimulatorModel::await_response(std::uint64_t id) const {
    std::unique_lock<std::mutex> rl(read_mu_);
    for (;;) {
        if (auto it = stash_.find(id); it != stash_.end()) {
            const json resp = std::move(it->second);
            stash_.erase(it);
            if (resp.contains("error"))
                throw SimulationError("adapter error: " + resp["error"].get<std::string>());
            const auto& metrics = resp.at("metrics");
            Vec z(opts_.schema.size());
            for (int j = 0; j < opts_.schema.size(); ++j)
                z[j] = metrics.at(opts_.schema.spec(j).name).get<double>();
            return z;
        }
        if (dead_) throw SimulationError(dead_reason_);
        if (reader_active_) {
            read_cv_.wait(rl);
            continue;
        }
        // Leader: drain one line while others wait, then share it.
        reader_active_ = true;
        rl.unlock();
        std::string line;
        std::string failure;
        try {
            line = read_line();
        } catch (const SimulationError& e) {
            failure = e.what();
        }
        rl.lock();
        reader_active_ = false;
        if (!failure.empty()) {
            dead_ = true;
            dead_reason_ = failure;
            read_cv_.notify_all();
            throw SimulationError(dead_reason_);
        }
        try {
            json resp = json::parse(line);
            // Key first: the by-value assignment moves resp away.
            const std::uint64_t rid = resp.at("id").get<std::uint64_t>();
            stash_[rid] = std::move(resp);
        } catch (const json::exception& e) {
            dead_ = true;
            dead_reason_ = std::string("adapter sent malformed response: ") + e.what();
            read_cv_.notify_all();
            throw SimulationError(dead_reason_);
        }
        read_cv_.notify_all();
    }
}

void ExternalSimulatorModel::shutdown() {
    if (to_child_ >= 0) {
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (child_pid_ > 0) {
        int status = 0;
        // Give the child a moment to exit on EOF, then force it.
        for (int i = 0; i < 50; ++i) {
            const pid_t r = waitpid(child_pid_, &status, WNOHANG);
            if (r == child_pid_ || r < 0) {
                child_pid_ = -1;
                return;
            }
            usleep(10000);
        }
        kill(child_pid_, SIGKILL);
        waitpid(child_pid_, &status, 0);
        child_pid_ = -1;
    }
}

}  // namespace ppaas
