#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netswap/model.hpp"

namespace netswap {

// One step of a mechanism run. `event` is one of push, pop, switch, settle, share.
// CTC events also carry the detected cycle, the closed component T and the stuck set S
// so a run can be compared step by step against a hand trace.
struct TraceEvent {
    std::string event;
    std::vector<AgentId> agents;
    std::optional<std::string> case_label; // "c.i" .. "c.v"

    std::optional<int> iteration;
    std::optional<int> round;
    bool induced = false; // pointer repair after a settlement, not a main-loop decision
    std::optional<std::vector<AgentId>> cycle;
    std::optional<std::vector<AgentId>> component;
    std::optional<std::vector<AgentId>> stuck;
    std::optional<AgentId> from;
    std::optional<AgentId> to;

    bool operator==(const TraceEvent&) const = default;
};

using Trace = std::vector<TraceEvent>;

// One compact JSON object per line.
std::string trace_to_jsonl(const Trace& trace);
std::string trace_event_to_json(const TraceEvent& event);

} // namespace netswap
