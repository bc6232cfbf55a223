#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "netswap/model.hpp"

namespace netswap {

// JSON instance documents:
//   {"n": 3, "initial": [1], "profiles": {"1": {"pref": [3,2,1], "neighbors": [2]}, ...},
//    "truth": {...same shape, optional...}}
// Throws MalformedJson for syntax errors, duplicate keys, missing or mistyped fields, and the
// validate_instance errors for well-formed documents describing invalid markets.
Instance parse_instance(std::string_view text);
RawInstance parse_raw_instance(std::string_view text);
std::string serialize_instance(const Instance& instance, bool pretty = false);
Instance load_instance_file(const std::string& path);

// Generators. Every network is symmetric (each undirected edge reported in both directions),
// preferences are uniform strict rankings and the initial set is a uniform nonempty subset.
// The same arguments always produce the same instance.
Instance gen_random(int n, double edge_probability, std::uint64_t seed);
Instance gen_line(int n, std::uint64_t seed = 0);
Instance gen_complete(int n, std::uint64_t seed = 0);
Instance gen_tree(int n, std::uint64_t seed);

// Uniform value in [0, bound) by rejection, identical on every platform (std distributions
// are implementation-defined).
std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& rng);

struct FixtureExpectation {
    std::string label; // e.g. "ttc", "ctc", "optimal-wcc-ir", "stable-cc-not-optimal-cc"
    Allocation allocation;
};

struct Fixture {
    std::string name;
    std::string description;
    Instance instance;
    std::vector<FixtureExpectation> expected;

    std::vector<Allocation> expected_for(std::string_view label) const;
};

std::vector<std::string> fixture_names();
// Throws UnknownFixture.
const Fixture& paper_fixture(std::string_view name);

// Exhaustive small-market enumeration over markets where every agent is qualified, one
// representative per isomorphism class of (symmetric network, initial set, preference profile).
// Preferences are truncated rankings: the houses an agent ranks above her own, in order, then
// her own house, then the rest in ascending id. Markets with unqualified agents reduce to
// smaller fully qualified markets because unqualified agents are pinned and affect no one.
struct EnumerationStats {
    std::uint64_t networks = 0;  // (network, initial set) classes
    std::uint64_t instances = 0; // emitted instances
};

// Every ordered selection of other houses followed by the agent's own, completed ascending.
std::vector<std::vector<AgentId>> truncated_rankings(int n, AgentId self);

class SmallMarketSpace {
public:
    // One canonical (network, initial set) per isomorphism class in which every connected
    // component holds an initial agent, with its automorphism group.
    struct Network {
        std::vector<std::vector<AgentId>> neighbors; // neighbors[i - 1]
        std::vector<AgentId> initial;
        // relabel[t][a][c]: code of agent automorphisms[t][a]'s ranking after applying
        // automorphism t to agent a + 1's ranking with code c. Identity excluded.
        std::vector<std::vector<int>> automorphisms; // zero-based images
        std::vector<std::vector<std::vector<int>>> relabel;
    };

    // Throws CapExceeded outside 1..5 agents.
    explicit SmallMarketSpace(int n);

    int agents() const { return n_; }
    int codes() const { return static_cast<int>(rankings_[0].size()); }
    const std::vector<AgentId>& ranking(AgentId agent, int code) const {
        return rankings_[static_cast<std::size_t>(agent - 1)][static_cast<std::size_t>(code)];
    }
    const std::vector<Network>& networks() const { return networks_; }

    // Profiles are indexed in base codes(); agent 1 is the most significant digit.
    std::uint64_t profile_count() const;
    void decode(std::uint64_t index, std::vector<int>& profile) const;

    // True when no automorphism maps `profile` to a lexicographically smaller one.
    bool representative(const Network& network, const std::vector<int>& profile) const;
    RawInstance raw_instance(const Network& network, const std::vector<int>& profile) const;

private:
    int n_;
    std::vector<std::vector<std::vector<AgentId>>> rankings_;
    std::vector<Network> networks_;
};

// Calls `visit` for each representative; stops early when `visit` returns false.
EnumerationStats enumerate_small_markets(int n, const std::function<bool(const Instance&)>& visit);

} // namespace netswap
