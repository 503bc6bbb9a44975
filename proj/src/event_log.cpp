#include "ppaas/event_log.hpp"

#include <stdexcept>

namespace ppaas {

EventLog::EventLog(const std::string& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::out | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open event log: " + path);
}

void EventLog::emit(long step, long episode, const std::string& kind, nlohmann::json payload) {
    if (!out_.is_open()) return;
    nlohmann::json rec;
    rec["step"] = step;
    rec["episode"] = episode;
    rec["kind"] = kind;
    rec["payload"] = std::move(payload);
    out_ << rec.dump() << '\n';
}

void EventLog::flush() {
    if (out_.is_open()) out_.flush();
}

EventLog::ReadResult EventLog::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read event log: " + path);
    ReadResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            result.records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception&) {
            // A cut-off final line is tolerated; garbage elsewhere is not.
            std::string rest;
            if (std::getline(in, rest))
                throw std::runtime_error("corrupt event log record in " + path);
            result.truncated_tail = true;
        }
    }
    return result;
}

}  // namespace ppaas
