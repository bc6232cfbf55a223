#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "netswap/model.hpp"

namespace netswap {

// Functional graph F(θ'): every qualified agent points at exactly one qualified agent.
class FavoritePointingGraph {
public:
    explicit FavoritePointingGraph(int n = 0) : pointer_(static_cast<std::size_t>(n), 0) {}

    int size() const { return static_cast<int>(pointer_.size()); }
    bool contains(AgentId i) const { return pointer(i) != 0; }
    AgentId pointer(AgentId i) const { return pointer_[static_cast<std::size_t>(i - 1)]; }
    void set_pointer(AgentId i, AgentId target) { pointer_[static_cast<std::size_t>(i - 1)] = target; }
    std::vector<AgentId> members() const;

private:
    std::vector<AgentId> pointer_; // 0 = not part of the graph
};

FavoritePointingGraph build_favorite_pointing(const Instance& instance, std::span<const AgentId> qualified);

// Best qualified house strictly below `current` in the ranking. `qualified` must be sorted.
// Throws NoLowerCandidate when `current` is the last qualified house.
AgentId next_favorite(const Preference& preference, AgentId current, std::span<const AgentId> qualified);

using Path = std::vector<AgentId>; // node sequence, both endpoints included

struct CycleDetection {
    Path walk;                   // p_1 .. p_m
    std::vector<AgentId> cycle;  // the repeating suffix, in walk order
};

CycleDetection detect_cycle_from(AgentId start, const FavoritePointingGraph& pointing);

// Induced subgraph G_T with per-edge mark sets. Limited to agents 1..64.
class MarkedSubgraph {
public:
    MarkedSubgraph() = default;
    MarkedSubgraph(const ReportedGraph& graph, std::vector<AgentId> nodes);

    const std::vector<AgentId>& nodes() const { return nodes_; }
    bool contains(AgentId i) const;
    bool has_edge(AgentId from, AgentId to) const;
    const std::vector<AgentId>& out(AgentId from) const;

    void mark(AgentId from, AgentId to, AgentId owner);
    std::uint64_t mark_mask(AgentId from, AgentId to) const;
    std::vector<AgentId> marks(AgentId from, AgentId to) const;

private:
    int local(AgentId i) const;

    int n_ = 0;
    std::vector<AgentId> nodes_;
    std::vector<int> local_;
    std::vector<std::vector<AgentId>> out_;
    std::vector<std::uint64_t> marks_; // k*k, bit (owner - 1)
};

inline std::uint64_t agent_bit(AgentId i) { return std::uint64_t{1} << (i - 1); }

// Smallest agent set T drawn from `eligible` that contains the cycle, is strongly connected in
// the reported graph and contains the pointer of each member. Ties go to the lexicographically
// smallest sorted member list. Empty when no such set exists.
std::vector<AgentId> minimum_closed_component(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                              const FavoritePointingGraph& pointing,
                                              std::span<const AgentId> eligible);
std::vector<AgentId> minimum_closed_component(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                              const FavoritePointingGraph& pointing);

// Next simple path from `from` to `to` in (length, lexicographic node sequence) order,
// strictly after `after` (or the first one when `after` is null).
std::optional<Path> next_simple_path(const MarkedSubgraph& graph, AgentId from, AgentId to, const Path* after);

struct ProcessedPath {
    AgentId owner = 0;
    Path path;
    bool shared = false; // carried marks of other agents once processed

    bool operator==(const ProcessedPath&) const = default;
};

struct PathDetectionOutput {
    std::vector<AgentId> component; // T, sorted; empty when no closed component exists
    MarkedSubgraph marked;
    std::vector<ProcessedPath> processed; // in processing order

    // The first (shortest) path processed for `owner`.
    const Path* first_path(AgentId owner) const;
};

PathDetectionOutput path_detection(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                   const FavoritePointingGraph& pointing, const Ordering& ordering,
                                   std::span<const AgentId> eligible);
PathDetectionOutput path_detection(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                   const FavoritePointingGraph& pointing, const Ordering& ordering);

// True when some path in G_T from `from` to `to` has every edge marked by `owner` alone.
bool has_exclusive_path(const MarkedSubgraph& marked, AgentId owner, AgentId from, AgentId to);

// Agents of T with no exclusively marked path to their pointer whose own marked outgoing
// edges carry no other agent's mark. Sorted ascending.
std::vector<AgentId> stuck_agents(const PathDetectionOutput& detection, const FavoritePointingGraph& pointing);

} // namespace netswap
