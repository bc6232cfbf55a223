#include "netswap/mechanisms.hpp"

#include <algorithm>

#include "netswap/connected_cycles.hpp"

namespace netswap {

std::string_view mechanism_name(MechanismKind kind) {
    switch (kind) {
    case MechanismKind::TTC: return "ttc";
    case MechanismKind::SWN: return "swn";
    case MechanismKind::LS: return "ls";
    case MechanismKind::CTC: return "ctc";
    }
    return "unknown";
}

std::optional<MechanismKind> parse_mechanism(std::string_view name) {
    for (auto kind : {MechanismKind::TTC, MechanismKind::SWN, MechanismKind::LS, MechanismKind::CTC}) {
        if (name == mechanism_name(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

namespace {

std::size_t at(AgentId i) { return static_cast<std::size_t>(i - 1); }

struct Market {
    ReportedGraph graph;
    std::vector<AgentId> qualified;
    std::vector<char> is_qualified;
};

Market qualify(const Instance& instance) {
    Market m{build_reported_graph(instance), {}, std::vector<char>(at(instance.size() + 1), 0)};
    m.qualified = qualified_set(m.graph, instance.initial());
    for (AgentId i : m.qualified) {
        m.is_qualified[at(i)] = 1;
    }
    return m;
}

// Cycles of the functional graph `pointer` restricted to `agents`, discovered in ascending
// order of their smallest walk start.
std::vector<std::vector<AgentId>> pointer_cycles(const std::vector<AgentId>& agents, const std::vector<AgentId>& pointer,
                                                 int n) {
    std::vector<int> state(static_cast<std::size_t>(n), 0); // 0 new, 1 on current walk, 2 done
    std::vector<std::vector<AgentId>> cycles;
    std::vector<AgentId> walk;
    for (AgentId start : agents) {
        if (state[at(start)] != 0) {
            continue;
        }
        walk.clear();
        AgentId cur = start;
        while (state[at(cur)] == 0) {
            state[at(cur)] = 1;
            walk.push_back(cur);
            cur = pointer[at(cur)];
        }
        if (state[at(cur)] == 1) {
            auto begin = std::find(walk.begin(), walk.end(), cur);
            cycles.emplace_back(begin, walk.end());
        }
        for (AgentId v : walk) {
            state[at(v)] = 2;
        }
    }
    return cycles;
}

template <class Candidate>
AgentId first_ranked(const Preference& preference, Candidate&& candidate) {
    for (AgentId h : preference.ranking()) {
        if (candidate(h)) {
            return h;
        }
    }
    throw Error(ErrorCode::EmptyCandidateSet, "no candidate house available");
}

// Shared round structure of TTC and SWN: every remaining agent points, all cycles trade.
template <class Eligible>
Allocation trade_all_cycles(const Instance& instance, Trace* trace, Eligible&& eligible) {
    const int n = instance.size();
    const Market market = qualify(instance);
    std::vector<AgentId> houses = Allocation::identity(n).houses();
    std::vector<char> remaining = market.is_qualified;
    std::vector<AgentId> alive = market.qualified;
    std::vector<AgentId> pointer(at(n + 1), 0);
    int round = 0;
    while (!alive.empty()) {
        for (AgentId i : alive) {
            pointer[at(i)] = first_ranked(instance.reported(i).preference,
                                          [&](AgentId h) { return remaining[at(h)] && eligible(i, h); });
        }
        for (const auto& cycle : pointer_cycles(alive, pointer, n)) {
            for (AgentId i : cycle) {
                houses[at(i)] = pointer[at(i)];
                remaining[at(i)] = 0;
            }
            if (trace) {
                TraceEvent ev;
                ev.event = "settle";
                ev.agents = cycle;
                ev.round = round;
                trace->push_back(std::move(ev));
            }
        }
        std::erase_if(alive, [&](AgentId i) { return !remaining[at(i)]; });
        ++round;
    }
    return Allocation(std::move(houses));
}

} // namespace

Allocation run_ttc(const Instance& instance, Trace* trace) {
    return trade_all_cycles(instance, trace, [](AgentId, AgentId) { return true; });
}

Allocation run_swn(const Instance& instance, Trace* trace) {
    const ReportedGraph graph = build_reported_graph(instance);
    return trade_all_cycles(instance, trace,
                            [&](AgentId i, AgentId h) { return h == i || graph.has_edge(i, h); });
}

Allocation run_ls(const Instance& instance, const TieRule& tie_rule, Trace* trace) {
    const int n = instance.size();
    const auto un = static_cast<std::size_t>(n);
    const Market market = qualify(instance);
    const Ordering order = compute_ordering(market.graph, instance.initial(), tie_rule);

    // Current (mutable) neighbor sets, restricted to qualified agents.
    std::vector<char> nbr(un * un, 0);
    auto neighbor = [&](AgentId i, AgentId j) -> char& { return nbr[at(i) * un + at(j)]; };
    for (AgentId i : market.qualified) {
        for (AgentId j : market.graph.out(i)) {
            neighbor(i, j) = 1;
        }
    }

    std::vector<AgentId> houses = Allocation::identity(n).houses();
    std::vector<char> out(un, 0);
    std::vector<char> in_stack(un, 0);
    std::vector<AgentId> stack;
    std::size_t out_count = 0;

    auto favorite = [&](AgentId i) {
        const AgentId bottom = stack.front();
        return first_ranked(instance.reported(i).preference, [&](AgentId h) {
            return !out[at(h)] && (h == i || h == bottom || neighbor(i, h));
        });
    };
    auto emit = [&](const char* kind, std::vector<AgentId> agents, int round) {
        if (trace) {
            TraceEvent ev;
            ev.event = kind;
            ev.agents = std::move(agents);
            ev.round = round;
            trace->push_back(std::move(ev));
        }
    };

    int round = 0;
    while (out_count < market.qualified.size()) {
        const AgentId first = *std::find_if(order.sequence.begin(), order.sequence.end(),
                                            [&](AgentId i) { return !out[at(i)]; });
        stack.push_back(first);
        in_stack[at(first)] = 1;
        emit("push", {first}, round);

        std::vector<AgentId> departed;
        while (!stack.empty()) {
            AgentId target = favorite(stack.back());
            while (!in_stack[at(target)]) {
                stack.push_back(target);
                in_stack[at(target)] = 1;
                emit("push", {target}, round);
                target = favorite(stack.back());
            }
            const auto begin = std::find(stack.begin(), stack.end(), target);
            std::vector<AgentId> cycle(begin, stack.end());
            for (std::size_t k = 0; k < cycle.size(); ++k) {
                const AgentId i = cycle[k];
                houses[at(i)] = k + 1 < cycle.size() ? cycle[k + 1] : target;
                out[at(i)] = 1;
                in_stack[at(i)] = 0;
            }
            stack.erase(begin, stack.end());
            out_count += cycle.size();
            emit("pop", cycle, round);

            for (AgentId i : cycle) {
                for (AgentId j : market.qualified) {
                    if (neighbor(i, j) && !out[at(j)]) {
                        for (AgentId c : cycle) {
                            neighbor(j, c) = 0;
                        }
                    }
                }
            }
            departed.insert(departed.end(), cycle.begin(), cycle.end());
        }

        std::vector<AgentId> shared;
        for (AgentId j : market.qualified) {
            if (out[at(j)]) {
                continue;
            }
            for (AgentId i : departed) {
                if (neighbor(i, j)) {
                    shared.push_back(j);
                    break;
                }
            }
        }
        for (AgentId a : shared) {
            for (AgentId b : shared) {
                if (a != b) {
                    neighbor(a, b) = 1;
                }
            }
        }
        emit("share", shared, round);
        ++round;
    }
    return Allocation(std::move(houses));
}

namespace {

class ConnectedTradingCycles {
public:
    ConnectedTradingCycles(const Instance& instance, const TieRule& tie_rule, Trace* trace)
        : instance_(instance), market_(qualify(instance)),
          order_(compute_ordering(market_.graph, instance.initial(), tie_rule)), trace_(trace),
          pointing_(build_favorite_pointing(instance, market_.qualified)),
          settled_(at(instance.size() + 1), 0), houses_(Allocation::identity(instance.size()).houses()) {}

    Allocation run() {
        std::vector<AgentId> unsettled = order_.sequence;
        int iteration = 0;
        while (!unsettled.empty()) {
            step(unsettled, iteration++);
            std::erase_if(unsettled, [&](AgentId i) { return settled_[at(i)] != 0; });
        }
        return Allocation(houses_);
    }

private:
    // `unsettled` is kept in ordering sequence.
    void step(const std::vector<AgentId>& unsettled, int iteration) {
        const CycleDetection detection = detect_cycle_from(unsettled.front(), pointing_);
        const auto& cycle = detection.cycle;

        // A cycle whose members each report an edge to their pointer is its own minimum
        // component, and every path is a single edge carrying only its owner's mark.
        if (std::all_of(cycle.begin(), cycle.end(), [&](AgentId i) {
                return pointing_.pointer(i) == i || market_.graph.has_edge(i, pointing_.pointer(i));
            })) {
            TraceEvent ev;
            ev.iteration = iteration;
            ev.cycle = cycle;
            ev.component = cycle;
            std::sort(ev.component->begin(), ev.component->end());
            ev.stuck = std::vector<AgentId>{};
            ev.case_label = "c.ii";
            const std::vector<AgentId> members = *ev.component;
            settle(members, std::move(ev));
            return;
        }

        std::vector<AgentId> eligible = unsettled;
        std::sort(eligible.begin(), eligible.end());
        const PathDetectionOutput pd = path_detection(cycle, market_.graph, pointing_, order_, eligible);

        TraceEvent ev;
        ev.iteration = iteration;
        ev.cycle = cycle;
        ev.component = pd.component;

        if (pd.component.empty()) {
            ev.case_label = "c.i";
            switch_pointer(last_unconnected(detection.walk, cycle, eligible), std::move(ev));
            return;
        }

        const std::vector<AgentId> stuck = stuck_agents(pd, pointing_);
        ev.stuck = stuck;
        const auto& component = pd.component;
        std::vector<AgentId> outside; // T \ C
        for (AgentId i : component) {
            if (std::find(cycle.begin(), cycle.end(), i) == cycle.end()) {
                outside.push_back(i);
            }
        }

        if (stuck.empty() && outside.empty()) {
            ev.case_label = "c.ii";
            settle(component, std::move(ev));
            return;
        }
        if (stuck.empty()) {
            ev.case_label = "c.iii";
            switch_pointer(pick_bridge_dependent(pd, cycle, outside), std::move(ev));
            return;
        }
        std::vector<AgentId> outside_stuck;
        for (AgentId i : stuck) {
            if (std::find(outside.begin(), outside.end(), i) != outside.end()) {
                outside_stuck.push_back(i);
            }
        }
        if (!outside_stuck.empty()) {
            ev.case_label = "c.iv";
            switch_pointer(min_order(outside_stuck), std::move(ev));
            return;
        }
        ev.case_label = "c.v";
        switch_pointer(pick_covering(pd, stuck), std::move(ev));
    }

    AgentId min_order(const std::vector<AgentId>& agents) const {
        return *std::min_element(agents.begin(), agents.end(), [&](AgentId a, AgentId b) {
            return order_.position_of(a) < order_.position_of(b);
        });
    }

    bool reaches(AgentId from, AgentId to, const std::vector<AgentId>& within) const {
        if (from == to) {
            return true;
        }
        std::vector<char> seen(at(instance_.size() + 1), 0);
        std::vector<AgentId> stack{from};
        seen[at(from)] = 1;
        while (!stack.empty()) {
            const AgentId u = stack.back();
            stack.pop_back();
            for (AgentId v : market_.graph.out(u)) {
                if (seen[at(v)] || !std::binary_search(within.begin(), within.end(), v)) {
                    continue;
                }
                if (v == to) {
                    return true;
                }
                seen[at(v)] = 1;
                stack.push_back(v);
            }
        }
        return false;
    }

    // c.i: the last cycle member that cannot reach her pointer among unsettled agents. When every
    // member can, the blocker is an agent those paths would pull in: the last such agent on the
    // walk, else the earliest in the ordering.
    AgentId last_unconnected(const Path& walk, const std::vector<AgentId>& cycle,
                             const std::vector<AgentId>& eligible) const {
        const auto unconnected = [&](AgentId i) { return !reaches(i, pointing_.pointer(i), eligible); };
        for (auto it = cycle.rbegin(); it != cycle.rend(); ++it) {
            if (unconnected(*it)) {
                return *it;
            }
        }
        for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
            if (unconnected(*it)) {
                return *it;
            }
        }
        for (AgentId i : order_.sequence) {
            if (std::binary_search(eligible.begin(), eligible.end(), i) && unconnected(i)) {
                return i;
            }
        }
        return cycle.back();
    }

    static bool passes_through(const Path* path, const std::vector<AgentId>& group) {
        if (!path || path->size() < 3) {
            return false;
        }
        return std::any_of(path->begin() + 1, path->end() - 1, [&](AgentId v) {
            return std::find(group.begin(), group.end(), v) != group.end();
        });
    }

    // c.iii: walking the cycle from the entry reached by the minimum-order outsider's pointer,
    // the last member whose path leans on an outsider; failing that, the last outsider whose
    // path leans on the cycle.
    AgentId pick_bridge_dependent(const PathDetectionOutput& pd, const std::vector<AgentId>& cycle,
                                  const std::vector<AgentId>& outside) const {
        const AgentId j = min_order(outside);
        std::vector<AgentId> chain;
        std::vector<char> seen(at(instance_.size() + 1), 0);
        for (AgentId cur = pointing_.pointer(j); !seen[at(cur)]; cur = pointing_.pointer(cur)) {
            seen[at(cur)] = 1;
            chain.push_back(cur);
        }
        auto entry = std::find_first_of(chain.begin(), chain.end(), cycle.begin(), cycle.end());
        std::vector<AgentId> rotated = cycle;
        if (entry != chain.end()) {
            std::rotate(rotated.begin(), std::find(rotated.begin(), rotated.end(), *entry), rotated.end());
        }
        for (auto it = rotated.rbegin(); it != rotated.rend(); ++it) {
            if (passes_through(pd.first_path(*it), outside)) {
                return *it;
            }
        }

        // Outsiders in the order they are met from j's pointer, then the rest by ordering.
        std::vector<AgentId> outsiders;
        for (AgentId v : chain) {
            if (std::find(outside.begin(), outside.end(), v) != outside.end()) {
                outsiders.push_back(v);
            }
        }
        std::vector<AgentId> rest;
        for (AgentId v : outside) {
            if (std::find(outsiders.begin(), outsiders.end(), v) == outsiders.end()) {
                rest.push_back(v);
            }
        }
        std::sort(rest.begin(), rest.end(),
                  [&](AgentId a, AgentId b) { return order_.position_of(a) < order_.position_of(b); });
        outsiders.insert(outsiders.end(), rest.begin(), rest.end());
        for (auto it = outsiders.rbegin(); it != outsiders.rend(); ++it) {
            if (passes_through(pd.first_path(*it), cycle)) {
                return *it;
            }
        }
        return rotated.back();
    }

    static bool covers(const Path& outer, const Path& inner) {
        if (inner.size() < 2) {
            return false;
        }
        for (std::size_t k = 0; k + 1 < inner.size(); ++k) {
            bool found = false;
            for (std::size_t m = 0; m + 1 < outer.size(); ++m) {
                if (outer[m] == inner[k] && outer[m + 1] == inner[k + 1]) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                return false;
            }
        }
        return true;
    }

    // c.v: minimum-order stuck agent whose path contains another agent's whole path.
    AgentId pick_covering(const PathDetectionOutput& pd, const std::vector<AgentId>& stuck) const {
        std::vector<AgentId> by_order = stuck;
        std::sort(by_order.begin(), by_order.end(),
                  [&](AgentId a, AgentId b) { return order_.position_of(a) < order_.position_of(b); });
        for (AgentId i : by_order) {
            const Path* mine = pd.first_path(i);
            if (!mine) {
                continue;
            }
            for (AgentId j : pd.component) {
                const Path* theirs = pd.first_path(j);
                if (j != i && theirs && covers(*mine, *theirs)) {
                    return i;
                }
            }
        }
        return by_order.front();
    }

    // Demote i's pointer until it lands on an unsettled agent. Returns the old pointer.
    AgentId demote(AgentId i) {
        const AgentId old = pointing_.pointer(i);
        AgentId target = old;
        do {
            target = next_favorite(instance_.reported(i).preference, target, market_.qualified);
        } while (settled_[at(target)]);
        pointing_.set_pointer(i, target);
        return old;
    }

    void switch_pointer(AgentId i, TraceEvent ev) {
        const AgentId old = demote(i);
        if (trace_) {
            ev.event = "switch";
            ev.agents = {i};
            ev.from = old;
            ev.to = pointing_.pointer(i);
            trace_->push_back(std::move(ev));
        }
    }

    void settle(const std::vector<AgentId>& component, TraceEvent ev) {
        for (AgentId i : component) {
            settled_[at(i)] = 1;
            houses_[at(i)] = pointing_.pointer(i);
        }
        if (trace_) {
            ev.event = "settle";
            ev.agents = component;
            trace_->push_back(ev);
        }
        for (AgentId i : order_.sequence) {
            if (!settled_[at(i)] && settled_[at(pointing_.pointer(i))]) {
                const AgentId old = demote(i);
                if (trace_) {
                    TraceEvent repair;
                    repair.event = "switch";
                    repair.agents = {i};
                    repair.case_label = "c.ii";
                    repair.iteration = ev.iteration;
                    repair.induced = true;
                    repair.from = old;
                    repair.to = pointing_.pointer(i);
                    trace_->push_back(std::move(repair));
                }
            }
        }
    }

    const Instance& instance_;
    const Market market_;
    const Ordering order_;
    Trace* trace_;
    FavoritePointingGraph pointing_;
    std::vector<char> settled_;
    std::vector<AgentId> houses_;
};

} // namespace

Allocation run_ctc(const Instance& instance, const TieRule& tie_rule, Trace* trace) {
    if (instance.size() > 64) {
        throw Error(ErrorCode::InvalidArgument, "connected trading cycles supports at most 64 agents");
    }
    return ConnectedTradingCycles(instance, tie_rule, trace).run();
}

Allocation run_mechanism(MechanismKind kind, const Instance& instance, const TieRule& tie_rule, Trace* trace) {
    switch (kind) {
    case MechanismKind::TTC: return run_ttc(instance, trace);
    case MechanismKind::SWN: return run_swn(instance, trace);
    case MechanismKind::LS: return run_ls(instance, tie_rule, trace);
    case MechanismKind::CTC: return run_ctc(instance, tie_rule, trace);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown mechanism");
}

} // namespace netswap
