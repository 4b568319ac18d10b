#include "ethsim/trace.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "ethsim/errors.hpp"

namespace ethsim {

TraceRecord trace_record(std::size_t run, const HistoryStep& step) {
    TraceRecord r;
    r.run = run;
    r.t = step.t;
    if (step.event) r.event_labels = step.event->labels;
    else r.event_labels = {step.chosen_label};
    r.weights = step.weights;
    r.chosen_label = step.chosen_label;
    r.entropy = step.entropy;
    r.state_fingerprint = step.post_state_fingerprint.hex();
    return r;
}

TraceRecord trace_record(std::size_t run, const ProtocolStep& step) {
    TraceRecord r;
    r.run = run;
    r.t = step.t;
    if (step.actual) {
        const std::string prefix = "t" + std::to_string(step.t) + ":e";
        for (std::size_t k = 0; k < step.weights.size(); ++k)
            r.event_labels.push_back(prefix + std::to_string(k));
    } else {
        r.event_labels = {step.label};
    }
    r.weights = step.weights;
    r.chosen_label = step.label;
    r.entropy = step.entropy;
    r.recorded_alpha = step.eta;
    r.state_fingerprint = step.post_state_fingerprint.hex();
    return r;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_json_line(const TraceRecord& r) {
    using nlohmann::json;
    std::string s = "{\"run\":" + std::to_string(r.run) + ",\"t\":" + std::to_string(r.t);
    s += ",\"event_labels\":[";
    for (std::size_t k = 0; k < r.event_labels.size(); ++k)
        s += (k ? "," : "") + json(r.event_labels[k]).dump();
    s += "],\"weights\":[";
    for (std::size_t k = 0; k < r.weights.size(); ++k) s += (k ? "," : "") + format_double(r.weights[k]);
    s += "],\"chosen_label\":" + json(r.chosen_label).dump();
    s += ",\"entropy\":" + format_double(r.entropy);
    if (r.recorded_alpha) s += ",\"recorded_alpha\":" + std::to_string(*r.recorded_alpha);
    s += ",\"state_fingerprint\":" + json(r.state_fingerprint).dump() + "}";
    return s;
}

TraceRecord parse_trace_line(const std::string& line) {
    using nlohmann::json;
    TraceRecord r;
    try {
        const json j = json::parse(line);
        r.run = j.at("run").get<std::size_t>();
        r.t = j.at("t").get<std::size_t>();
        r.event_labels = j.at("event_labels").get<std::vector<std::string>>();
        r.weights = j.at("weights").get<std::vector<double>>();
        r.chosen_label = j.at("chosen_label").get<std::string>();
        r.entropy = j.at("entropy").get<double>();
        if (j.contains("recorded_alpha")) r.recorded_alpha = j.at("recorded_alpha").get<std::size_t>();
        r.state_fingerprint = j.at("state_fingerprint").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("trace line: ") + e.what());
    }
    return r;
}

void TraceSink::write(const TraceRecord& r) {
    const std::string line = to_json_line(r);
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
}

void TraceSink::write_all(const std::vector<TraceRecord>& rs) {
    std::string block;
    for (const auto& r : rs) block += to_json_line(r) + '\n';
    std::lock_guard lock(mutex_);
    out_ << block;
}

}  // namespace ethsim
