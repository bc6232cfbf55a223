#include "netswap/trace.hpp"

#include "json.hpp"

namespace netswap {

std::string trace_event_to_json(const TraceEvent& event) {
    nlohmann::ordered_json j;
    j["event"] = event.event;
    j["agents"] = event.agents;
    j["case"] = event.case_label ? nlohmann::ordered_json(*event.case_label) : nlohmann::ordered_json();
    if (event.iteration) {
        j["iteration"] = *event.iteration;
    }
    if (event.round) {
        j["round"] = *event.round;
    }
    if (event.induced) {
        j["induced"] = true;
    }
    if (event.cycle) {
        j["cycle"] = *event.cycle;
    }
    if (event.component) {
        j["component"] = *event.component;
    }
    if (event.stuck) {
        j["stuck"] = *event.stuck;
    }
    if (event.from) {
        j["from"] = *event.from;
    }
    if (event.to) {
        j["to"] = *event.to;
    }
    return j.dump();
}

std::string trace_to_jsonl(const Trace& trace) {
    std::string out;
    for (const auto& event : trace) {
        out += trace_event_to_json(event);
        out += '\n';
    }
    return out;
}

} // namespace netswap
