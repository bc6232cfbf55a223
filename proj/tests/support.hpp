#pragma once

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "netswap/model.hpp"

namespace netswap::test {

struct AgentSpec {
    std::vector<AgentId> pref;
    std::vector<AgentId> neighbors;
};

inline Instance market(std::vector<AgentId> initial, std::vector<AgentSpec> agents) {
    RawInstance raw;
    raw.n = static_cast<int>(agents.size());
    raw.initial = std::move(initial);
    for (auto& a : agents) {
        raw.profiles.push_back({std::move(a.pref), std::move(a.neighbors)});
    }
    return validate_instance(raw);
}

// Every agent knows every other agent.
inline std::vector<AgentId> everyone_but(int n, AgentId self) {
    std::vector<AgentId> out;
    for (AgentId j = 1; j <= n; ++j) {
        if (j != self) {
            out.push_back(j);
        }
    }
    return out;
}

inline Allocation houses(std::vector<AgentId> h) { return Allocation(std::move(h)); }

inline std::vector<Allocation> all_allocations(int n) {
    std::vector<AgentId> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<Allocation> out;
    do {
        out.emplace_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

} // namespace netswap::test
