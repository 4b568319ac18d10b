#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ethsim/histories.hpp"
#include "ethsim/indirect.hpp"

namespace ethsim {

// One line of a trace file. Numbers are written with 17 significant digits,
// so a record survives a text round trip bit for bit.
struct TraceRecord {
    std::size_t run = 0;
    std::size_t t = 0;
    std::vector<std::string> event_labels;
    std::vector<double> weights;
    std::string chosen_label;
    double entropy = 0.0;
    std::optional<std::size_t> recorded_alpha;
    std::string state_fingerprint;

    bool operator==(const TraceRecord&) const = default;
};

TraceRecord trace_record(std::size_t run, const HistoryStep& step);
TraceRecord trace_record(std::size_t run, const ProtocolStep& step);

std::string format_double(double x);
std::string to_json_line(const TraceRecord& r);
TraceRecord parse_trace_line(const std::string& line);

// Serialises writes from concurrent producers.
class TraceSink {
public:
    explicit TraceSink(std::ostream& out) : out_(out) {}
    void write(const TraceRecord& r);
    void write_all(const std::vector<TraceRecord>& rs);

private:
    std::ostream& out_;
    std::mutex mutex_;
};

}  // namespace ethsim
