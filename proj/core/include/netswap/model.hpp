#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netswap/error.hpp"

namespace netswap {

// Agents are numbered 1..n. House h_i is identified with its owner i.
using AgentId = int;

// Strict ranking over all houses, most preferred first.
class Preference {
public:
    Preference() = default;

    // Throws NonPermutationPreference unless `ranking` is a permutation of 1..ranking.size().
    explicit Preference(std::vector<AgentId> ranking);

    int size() const { return static_cast<int>(ranking_.size()); }
    const std::vector<AgentId>& ranking() const { return ranking_; }

    // 0 is the top choice.
    int rank(AgentId house) const { return rank_[static_cast<std::size_t>(house - 1)]; }
    bool prefers(AgentId a, AgentId b) const { return rank(a) < rank(b); }
    bool weakly_prefers(AgentId a, AgentId b) const { return rank(a) <= rank(b); }

    bool operator==(const Preference& other) const { return ranking_ == other.ranking_; }

private:
    std::vector<AgentId> ranking_;
    std::vector<int> rank_;
};

struct AgentType {
    Preference preference;
    std::vector<AgentId> neighbors; // sorted, unique

    bool operator==(const AgentType&) const = default;
};

// Unvalidated instance description, as read from a document or built by hand.
struct RawAgentType {
    std::vector<AgentId> pref;
    std::vector<AgentId> neighbors;
};

struct RawInstance {
    int n = 0;
    std::vector<AgentId> initial;
    std::vector<RawAgentType> profiles; // profiles[i - 1] describes agent i
    std::optional<std::vector<RawAgentType>> truth;
};

class Instance;
Instance validate_instance(const RawInstance& raw);

// A validated market: reported profile, initial agents and (optionally) the true profile.
// Immutable; derived instances are produced by value.
class Instance {
public:
    int size() const { return n_; }
    const std::vector<AgentId>& initial() const { return initial_; }

    const AgentType& reported(AgentId i) const { return reported_[static_cast<std::size_t>(i - 1)]; }
    const std::vector<AgentType>& reported_profile() const { return reported_; }

    bool has_truth() const { return truth_ != nullptr; }
    // Falls back to the reported type when no true profile is attached.
    const AgentType& truth(AgentId i) const { return truth_profile()[static_cast<std::size_t>(i - 1)]; }
    const std::vector<AgentType>& truth_profile() const { return truth_ ? *truth_ : reported_; }

    // Same market with agent i's report replaced. Throws ReportExceedsTruth when the new
    // neighbor set is not a subset of i's true neighbors.
    Instance with_report(AgentId i, AgentType report) const;

    // Replaces every report with the corresponding true type.
    Instance truthful() const;

    Instance with_initial(std::vector<AgentId> initial) const;

    RawInstance raw() const;

    bool operator==(const Instance& other) const;

private:
    friend Instance validate_instance(const RawInstance& raw);
    Instance() = default;

    int n_ = 0;
    std::vector<AgentId> initial_;
    std::vector<AgentType> reported_;
    std::shared_ptr<const std::vector<AgentType>> truth_;
};

// Directed graph G(θ'): edge i -> j iff j is in i's reported neighbor set.
class ReportedGraph {
public:
    explicit ReportedGraph(int n = 0);
    explicit ReportedGraph(const std::vector<AgentType>& profile);

    int size() const { return n_; }
    const std::vector<AgentId>& out(AgentId i) const { return out_[static_cast<std::size_t>(i - 1)]; }
    bool has_edge(AgentId from, AgentId to) const {
        return matrix_[static_cast<std::size_t>(from - 1) * static_cast<std::size_t>(n_) +
                       static_cast<std::size_t>(to - 1)] != 0;
    }
    bool mutual(AgentId a, AgentId b) const { return has_edge(a, b) && has_edge(b, a); }

    void add_edge(AgentId from, AgentId to);
    std::size_t edge_count() const { return edge_count_; }
    std::vector<std::pair<AgentId, AgentId>> edges() const;

private:
    int n_;
    std::size_t edge_count_ = 0;
    std::vector<std::vector<AgentId>> out_;
    std::vector<std::uint8_t> matrix_;
};

ReportedGraph build_reported_graph(const Instance& instance);

// Agents reachable from `initial` along reported edges, sorted ascending.
std::vector<AgentId> qualified_set(const ReportedGraph& graph, std::span<const AgentId> initial);

// Tie handling among agents at equal distance from the initial set. Default is ascending id;
// a seed switches to a reproducible pseudo-random order.
struct TieRule {
    std::optional<std::uint64_t> seed;

    static TieRule by_id() { return {}; }
    static TieRule shuffled(std::uint64_t seed) { return TieRule{seed}; }
};

struct Ordering {
    std::vector<AgentId> sequence;  // qualified agents, nearest first
    std::vector<int> position;      // position[i - 1], -1 for unqualified agents
    std::vector<int> distance;      // BFS distance from the initial set, -1 if unreachable

    int position_of(AgentId i) const { return position[static_cast<std::size_t>(i - 1)]; }
    int distance_of(AgentId i) const { return distance[static_cast<std::size_t>(i - 1)]; }
};

Ordering compute_ordering(const ReportedGraph& graph, std::span<const AgentId> initial,
                          const TieRule& tie_rule = {});

// The candidate whose house ranks highest. Throws EmptyCandidateSet.
AgentId favorite_in(const Preference& preference, std::span<const AgentId> candidates);

// houses()[i - 1] is the owner of the house assigned to agent i.
class Allocation {
public:
    Allocation() = default;

    // Throws InvalidArgument unless `houses` is a permutation of 1..n.
    explicit Allocation(std::vector<AgentId> houses);
    static Allocation identity(int n);

    int size() const { return static_cast<int>(houses_.size()); }
    AgentId house_of(AgentId agent) const { return houses_[static_cast<std::size_t>(agent - 1)]; }
    const std::vector<AgentId>& houses() const { return houses_; }

    // "(h3,h2,h1)"
    std::string to_string() const;

    bool operator==(const Allocation&) const = default;

private:
    std::vector<AgentId> houses_;
};

} // namespace netswap
