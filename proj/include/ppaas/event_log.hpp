#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppaas {

// Newline-delimited JSON run log. Records carry no wall-clock data so a
// (config, seed) pair reproduces the file byte for byte.
class EventLog {
public:
    EventLog() = default;  // disabled
    explicit EventLog(const std::string& path);

    bool enabled() const { return out_.is_open(); }
    void emit(long step, long episode, const std::string& kind, nlohmann::json payload);
    void flush();

    struct ReadResult {
        std::vector<nlohmann::json> records;
        bool truncated_tail = false;  // final line was cut off mid-record
    };
    static ReadResult read_file(const std::string& path);

private:
    std::ofstream out_;
};

}  // namespace ppaas
