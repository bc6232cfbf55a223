#include "netswap/model.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>
#include <tuple>

namespace netswap {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPermutationPreference: return "NonPermutationPreference";
    case ErrorCode::NeighborOutOfRange: return "NeighborOutOfRange";
    case ErrorCode::SelfNeighbor: return "SelfNeighbor";
    case ErrorCode::EmptyInitialSet: return "EmptyInitialSet";
    case ErrorCode::ReportExceedsTruth: return "ReportExceedsTruth";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::NoLowerCandidate: return "NoLowerCandidate";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Preference::Preference(std::vector<AgentId> ranking) : ranking_(std::move(ranking)) {
    const auto n = ranking_.size();
    rank_.assign(n, -1);
    for (std::size_t r = 0; r < n; ++r) {
        const AgentId h = ranking_[r];
        if (h < 1 || static_cast<std::size_t>(h) > n || rank_[static_cast<std::size_t>(h - 1)] != -1) {
            throw Error(ErrorCode::NonPermutationPreference,
                        "ranking entry " + std::to_string(h) + " at position " + std::to_string(r));
        }
        rank_[static_cast<std::size_t>(h - 1)] = static_cast<int>(r);
    }
}

namespace {

std::vector<AgentType> validate_profile(int n, const std::vector<RawAgentType>& raw, const char* what) {
    if (static_cast<int>(raw.size()) != n) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(what) + " describes " + std::to_string(raw.size()) + " agents, expected " +
                        std::to_string(n));
    }
    std::vector<AgentType> out;
    out.reserve(raw.size());
    for (int i = 1; i <= n; ++i) {
        const auto& entry = raw[static_cast<std::size_t>(i - 1)];
        if (static_cast<int>(entry.pref.size()) != n) {
            throw Error(ErrorCode::NonPermutationPreference,
                        "agent " + std::to_string(i) + " ranks " + std::to_string(entry.pref.size()) +
                            " houses, expected " + std::to_string(n));
        }
        AgentType type;
        type.preference = Preference(entry.pref);
        type.neighbors = entry.neighbors;
        std::sort(type.neighbors.begin(), type.neighbors.end());
        type.neighbors.erase(std::unique(type.neighbors.begin(), type.neighbors.end()), type.neighbors.end());
        for (AgentId j : type.neighbors) {
            if (j < 1 || j > n) {
                throw Error(ErrorCode::NeighborOutOfRange,
                            "agent " + std::to_string(i) + " lists neighbor " + std::to_string(j));
            }
            if (j == i) {
                throw Error(ErrorCode::SelfNeighbor, "agent " + std::to_string(i) + " lists herself");
            }
        }
        out.push_back(std::move(type));
    }
    return out;
}

void check_report_within_truth(AgentId i, const AgentType& report, const AgentType& truth) {
    if (!std::includes(truth.neighbors.begin(), truth.neighbors.end(), report.neighbors.begin(),
                       report.neighbors.end())) {
        throw Error(ErrorCode::ReportExceedsTruth,
                    "agent " + std::to_string(i) + " reports a neighbor outside her true neighbor set");
    }
}

std::vector<AgentId> validate_initial(int n, std::vector<AgentId> initial) {
    if (initial.empty()) {
        throw Error(ErrorCode::EmptyInitialSet, "the initial agent set is empty");
    }
    std::sort(initial.begin(), initial.end());
    initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
    for (AgentId i : initial) {
        if (i < 1 || i > n) {
            throw Error(ErrorCode::NeighborOutOfRange, "initial agent " + std::to_string(i) + " out of range");
        }
    }
    return initial;
}

RawAgentType to_raw(const AgentType& type) {
    return RawAgentType{type.preference.ranking(), type.neighbors};
}

} // namespace

Instance validate_instance(const RawInstance& raw) {
    if (raw.n < 1) {
        throw Error(ErrorCode::InvalidArgument, "an instance needs at least one agent");
    }
    Instance inst;
    inst.n_ = raw.n;
    inst.initial_ = validate_initial(raw.n, raw.initial);
    inst.reported_ = validate_profile(raw.n, raw.profiles, "profiles");
    if (raw.truth) {
        auto truth = validate_profile(raw.n, *raw.truth, "truth");
        for (AgentId i = 1; i <= raw.n; ++i) {
            check_report_within_truth(i, inst.reported(i), truth[static_cast<std::size_t>(i - 1)]);
        }
        inst.truth_ = std::make_shared<const std::vector<AgentType>>(std::move(truth));
    }
    return inst;
}

Instance Instance::with_report(AgentId i, AgentType report) const {
    if (i < 1 || i > n_) {
        throw Error(ErrorCode::InvalidArgument, "agent " + std::to_string(i) + " out of range");
    }
    if (report.preference.size() != n_) {
        throw Error(ErrorCode::NonPermutationPreference, "report ranks the wrong number of houses");
    }
    if (truth_) {
        check_report_within_truth(i, report, truth(i));
    }
    Instance copy = *this;
    copy.reported_[static_cast<std::size_t>(i - 1)] = std::move(report);
    return copy;
}

Instance Instance::truthful() const {
    Instance copy = *this;
    if (truth_) {
        copy.reported_ = *truth_;
    }
    return copy;
}

Instance Instance::with_initial(std::vector<AgentId> initial) const {
    Instance copy = *this;
    copy.initial_ = validate_initial(n_, std::move(initial));
    return copy;
}

RawInstance Instance::raw() const {
    RawInstance out;
    out.n = n_;
    out.initial = initial_;
    for (const auto& t : reported_) {
        out.profiles.push_back(to_raw(t));
    }
    if (truth_) {
        out.truth.emplace();
        for (const auto& t : *truth_) {
            out.truth->push_back(to_raw(t));
        }
    }
    return out;
}

bool Instance::operator==(const Instance& other) const {
    if (n_ != other.n_ || initial_ != other.initial_ || reported_ != other.reported_) {
        return false;
    }
    if (has_truth() != other.has_truth()) {
        return false;
    }
    return !has_truth() || *truth_ == *other.truth_;
}

ReportedGraph::ReportedGraph(int n)
    : n_(n), out_(static_cast<std::size_t>(n)), matrix_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

ReportedGraph::ReportedGraph(const std::vector<AgentType>& profile) : ReportedGraph(static_cast<int>(profile.size())) {
    for (AgentId i = 1; i <= n_; ++i) {
        for (AgentId j : profile[static_cast<std::size_t>(i - 1)].neighbors) {
            add_edge(i, j);
        }
    }
}

void ReportedGraph::add_edge(AgentId from, AgentId to) {
    auto& cell = matrix_[static_cast<std::size_t>(from - 1) * static_cast<std::size_t>(n_) +
                         static_cast<std::size_t>(to - 1)];
    if (cell) {
        return;
    }
    cell = 1;
    ++edge_count_;
    auto& list = out_[static_cast<std::size_t>(from - 1)];
    list.insert(std::upper_bound(list.begin(), list.end(), to), to);
}

std::vector<std::pair<AgentId, AgentId>> ReportedGraph::edges() const {
    std::vector<std::pair<AgentId, AgentId>> result;
    result.reserve(edge_count_);
    for (AgentId i = 1; i <= n_; ++i) {
        for (AgentId j : out(i)) {
            result.emplace_back(i, j);
        }
    }
    return result;
}

ReportedGraph build_reported_graph(const Instance& instance) {
    return ReportedGraph(instance.reported_profile());
}

namespace {

std::vector<int> bfs_distances(const ReportedGraph& graph, std::span<const AgentId> initial) {
    std::vector<int> dist(static_cast<std::size_t>(graph.size()), -1);
    std::deque<AgentId> queue;
    for (AgentId s : initial) {
        if (dist[static_cast<std::size_t>(s - 1)] == -1) {
            dist[static_cast<std::size_t>(s - 1)] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const AgentId u = queue.front();
        queue.pop_front();
        for (AgentId v : graph.out(u)) {
            if (dist[static_cast<std::size_t>(v - 1)] == -1) {
                dist[static_cast<std::size_t>(v - 1)] = dist[static_cast<std::size_t>(u - 1)] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

} // namespace

std::vector<AgentId> qualified_set(const ReportedGraph& graph, std::span<const AgentId> initial) {
    const auto dist = bfs_distances(graph, initial);
    std::vector<AgentId> result;
    for (AgentId i = 1; i <= graph.size(); ++i) {
        if (dist[static_cast<std::size_t>(i - 1)] >= 0) {
            result.push_back(i);
        }
    }
    return result;
}

Ordering compute_ordering(const ReportedGraph& graph, std::span<const AgentId> initial, const TieRule& tie_rule) {
    Ordering order;
    order.distance = bfs_distances(graph, initial);
    const auto n = static_cast<std::size_t>(graph.size());

    // mt19937_64 output is fully specified by the standard, so seeded orders are portable.
    std::vector<std::uint64_t> key(n, 0);
    if (tie_rule.seed) {
        std::mt19937_64 rng(*tie_rule.seed);
        for (auto& k : key) {
            k = rng();
        }
    }
    for (AgentId i = 1; i <= graph.size(); ++i) {
        if (order.distance[static_cast<std::size_t>(i - 1)] >= 0) {
            order.sequence.push_back(i);
        }
    }
    std::sort(order.sequence.begin(), order.sequence.end(), [&](AgentId a, AgentId b) {
        const auto ia = static_cast<std::size_t>(a - 1);
        const auto ib = static_cast<std::size_t>(b - 1);
        return std::tie(order.distance[ia], key[ia], a) < std::tie(order.distance[ib], key[ib], b);
    });
    order.position.assign(n, -1);
    for (std::size_t t = 0; t < order.sequence.size(); ++t) {
        order.position[static_cast<std::size_t>(order.sequence[t] - 1)] = static_cast<int>(t);
    }
    return order;
}

AgentId favorite_in(const Preference& preference, std::span<const AgentId> candidates) {
    if (candidates.empty()) {
        throw Error(ErrorCode::EmptyCandidateSet, "no candidate to choose from");
    }
    AgentId best = candidates.front();
    for (AgentId c : candidates) {
        if (preference.prefers(c, best)) {
            best = c;
        }
    }
    return best;
}

Allocation::Allocation(std::vector<AgentId> houses) : houses_(std::move(houses)) {
    std::vector<char> seen(houses_.size(), 0);
    for (AgentId h : houses_) {
        if (h < 1 || static_cast<std::size_t>(h) > houses_.size() || seen[static_cast<std::size_t>(h - 1)]) {
            throw Error(ErrorCode::InvalidArgument, "allocation is not a bijection");
        }
        seen[static_cast<std::size_t>(h - 1)] = 1;
    }
}

Allocation Allocation::identity(int n) {
    std::vector<AgentId> houses(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        houses[static_cast<std::size_t>(i)] = i + 1;
    }
    return Allocation(std::move(houses));
}

std::string Allocation::to_string() const {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < houses_.size(); ++i) {
        out << (i ? "," : "") << 'h' << houses_[i];
    }
    out << ')';
    return out.str();
}

} // namespace netswap
