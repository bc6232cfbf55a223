#include "netswap/connected_cycles.hpp"

#include <algorithm>
#include <bit>
#include <deque>

namespace netswap {

namespace {

constexpr int kMaskAgents = 64;

void require_mask_capacity(int n) {
    if (n > kMaskAgents) {
        throw Error(ErrorCode::InvalidArgument,
                    "connected trading cycles supports at most 64 agents, got " + std::to_string(n));
    }
}

std::uint64_t to_mask(std::span<const AgentId> agents) {
    std::uint64_t mask = 0;
    for (AgentId i : agents) {
        mask |= agent_bit(i);
    }
    return mask;
}

AgentId lowest(std::uint64_t mask) { return std::countr_zero(mask) + 1; }

// Reachability inside `within`, following `adjacency` masks.
std::uint64_t reach(AgentId start, std::uint64_t within, const std::vector<std::uint64_t>& adjacency) {
    std::uint64_t seen = agent_bit(start);
    std::uint64_t frontier = seen;
    while (frontier) {
        const AgentId u = lowest(frontier);
        frontier &= frontier - 1;
        const std::uint64_t next = adjacency[static_cast<std::size_t>(u - 1)] & within & ~seen;
        seen |= next;
        frontier |= next;
    }
    return seen;
}

} // namespace

std::vector<AgentId> FavoritePointingGraph::members() const {
    std::vector<AgentId> result;
    for (AgentId i = 1; i <= size(); ++i) {
        if (contains(i)) {
            result.push_back(i);
        }
    }
    return result;
}

FavoritePointingGraph build_favorite_pointing(const Instance& instance, std::span<const AgentId> qualified) {
    FavoritePointingGraph pointing(instance.size());
    for (AgentId i : qualified) {
        pointing.set_pointer(i, favorite_in(instance.reported(i).preference, qualified));
    }
    return pointing;
}

AgentId next_favorite(const Preference& preference, AgentId current, std::span<const AgentId> qualified) {
    const auto& ranking = preference.ranking();
    for (auto r = static_cast<std::size_t>(preference.rank(current)) + 1; r < ranking.size(); ++r) {
        if (std::binary_search(qualified.begin(), qualified.end(), ranking[r])) {
            return ranking[r];
        }
    }
    throw Error(ErrorCode::NoLowerCandidate,
                "no qualified house ranks below h" + std::to_string(current));
}

CycleDetection detect_cycle_from(AgentId start, const FavoritePointingGraph& pointing) {
    CycleDetection result;
    std::vector<int> seen_at(static_cast<std::size_t>(pointing.size()), -1);
    AgentId cur = start;
    while (seen_at[static_cast<std::size_t>(cur - 1)] < 0) {
        seen_at[static_cast<std::size_t>(cur - 1)] = static_cast<int>(result.walk.size());
        result.walk.push_back(cur);
        cur = pointing.pointer(cur);
        if (cur == 0) {
            throw Error(ErrorCode::InvalidArgument, "pointer walk left the pointing graph");
        }
    }
    result.cycle.assign(result.walk.begin() + seen_at[static_cast<std::size_t>(cur - 1)], result.walk.end());
    return result;
}

MarkedSubgraph::MarkedSubgraph(const ReportedGraph& graph, std::vector<AgentId> nodes)
    : n_(graph.size()), nodes_(std::move(nodes)) {
    require_mask_capacity(n_);
    std::sort(nodes_.begin(), nodes_.end());
    local_.assign(static_cast<std::size_t>(n_), -1);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        local_[static_cast<std::size_t>(nodes_[k] - 1)] = static_cast<int>(k);
    }
    out_.resize(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        for (AgentId v : graph.out(nodes_[k])) {
            if (contains(v)) {
                out_[k].push_back(v);
            }
        }
    }
    marks_.assign(nodes_.size() * nodes_.size(), 0);
}

int MarkedSubgraph::local(AgentId i) const {
    if (i < 1 || i > n_) {
        return -1;
    }
    return local_[static_cast<std::size_t>(i - 1)];
}

bool MarkedSubgraph::contains(AgentId i) const { return local(i) >= 0; }

bool MarkedSubgraph::has_edge(AgentId from, AgentId to) const {
    if (!contains(from) || !contains(to)) {
        return false;
    }
    const auto& list = out(from);
    return std::binary_search(list.begin(), list.end(), to);
}

const std::vector<AgentId>& MarkedSubgraph::out(AgentId from) const {
    return out_[static_cast<std::size_t>(local(from))];
}

void MarkedSubgraph::mark(AgentId from, AgentId to, AgentId owner) {
    marks_[static_cast<std::size_t>(local(from)) * nodes_.size() + static_cast<std::size_t>(local(to))] |=
        agent_bit(owner);
}

std::uint64_t MarkedSubgraph::mark_mask(AgentId from, AgentId to) const {
    if (!has_edge(from, to)) {
        return 0;
    }
    return marks_[static_cast<std::size_t>(local(from)) * nodes_.size() + static_cast<std::size_t>(local(to))];
}

std::vector<AgentId> MarkedSubgraph::marks(AgentId from, AgentId to) const {
    std::vector<AgentId> result;
    for (std::uint64_t m = mark_mask(from, to); m; m &= m - 1) {
        result.push_back(lowest(m));
    }
    return result;
}

std::vector<AgentId> minimum_closed_component(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                              const FavoritePointingGraph& pointing,
                                              std::span<const AgentId> eligible) {
    require_mask_capacity(graph.size());
    const std::uint64_t allowed = to_mask(eligible);
    const std::uint64_t base = to_mask(cycle);
    if (cycle.empty() || (base & ~allowed) != 0) {
        return {};
    }

    std::vector<std::uint64_t> out_mask(static_cast<std::size_t>(graph.size()), 0);
    std::vector<std::uint64_t> in_mask(static_cast<std::size_t>(graph.size()), 0);
    for (AgentId i = 1; i <= graph.size(); ++i) {
        for (AgentId j : graph.out(i)) {
            out_mask[static_cast<std::size_t>(i - 1)] |= agent_bit(j);
            in_mask[static_cast<std::size_t>(j - 1)] |= agent_bit(i);
        }
    }

    auto closed_and_connected = [&](std::uint64_t members) {
        for (std::uint64_t m = members; m; m &= m - 1) {
            const AgentId i = lowest(m);
            const AgentId p = pointing.pointer(i);
            if (p == 0 || (members & agent_bit(p)) == 0) {
                return false;
            }
        }
        const AgentId root = lowest(members);
        return reach(root, members, out_mask) == members && reach(root, members, in_mask) == members;
    };

    std::vector<AgentId> extra;
    for (std::uint64_t m = allowed & ~base; m; m &= m - 1) {
        extra.push_back(lowest(m));
    }

    // Combinations of each size in lexicographic order.
    std::vector<std::size_t> idx;
    for (std::size_t size = 0; size <= extra.size(); ++size) {
        idx.resize(size);
        for (std::size_t k = 0; k < size; ++k) {
            idx[k] = k;
        }
        while (true) {
            std::uint64_t members = base;
            for (std::size_t k : idx) {
                members |= agent_bit(extra[k]);
            }
            if (closed_and_connected(members)) {
                std::vector<AgentId> result;
                for (std::uint64_t m = members; m; m &= m - 1) {
                    result.push_back(lowest(m));
                }
                return result;
            }
            std::size_t k = size;
            while (k > 0 && idx[k - 1] == extra.size() - size + k - 1) {
                --k;
            }
            if (k == 0) {
                break;
            }
            ++idx[k - 1];
            for (std::size_t j = k; j < size; ++j) {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    return {};
}

std::vector<AgentId> minimum_closed_component(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                              const FavoritePointingGraph& pointing) {
    const auto members = pointing.members();
    return minimum_closed_component(cycle, graph, pointing, members);
}

namespace {

class SimplePathSearch {
public:
    SimplePathSearch(const MarkedSubgraph& graph, AgentId from, AgentId to)
        : graph_(graph), from_(from), to_(to) {
        // Distance to `to` ignoring the simple-path constraint; a lower bound used for pruning.
        for (AgentId v : graph.nodes()) {
            dist_[v] = -1;
        }
        dist_[to] = 0;
        std::deque<AgentId> queue{to};
        while (!queue.empty()) {
            const AgentId v = queue.front();
            queue.pop_front();
            for (AgentId u : graph.nodes()) {
                if (dist_[u] < 0 && graph.has_edge(u, v)) {
                    dist_[u] = dist_[v] + 1;
                    queue.push_back(u);
                }
            }
        }
    }

    std::optional<Path> after(const Path* previous) {
        if (dist_[from_] < 0) {
            return std::nullopt;
        }
        if (from_ == to_) {
            if (previous) {
                return std::nullopt;
            }
            return Path{from_};
        }
        const int max_len = static_cast<int>(graph_.nodes().size()) - 1;
        const int start_len = previous ? static_cast<int>(previous->size()) - 1 : dist_[from_];
        for (int len = start_len; len <= max_len; ++len) {
            target_len_ = len;
            bound_ = (previous && static_cast<int>(previous->size()) - 1 == len) ? previous : nullptr;
            prefix_.assign(1, from_);
            visited_ = agent_bit(from_);
            if (search(bound_ != nullptr)) {
                return prefix_;
            }
        }
        return std::nullopt;
    }

private:
    bool search(bool tight) {
        const AgentId u = prefix_.back();
        const int depth = static_cast<int>(prefix_.size()) - 1;
        if (depth == target_len_) {
            return u == to_ && !tight;
        }
        const int remaining = target_len_ - depth - 1;
        for (AgentId v : graph_.out(u)) {
            if ((visited_ & agent_bit(v)) || dist_[v] < 0 || dist_[v] > remaining) {
                continue;
            }
            if (v == to_ && remaining != 0) {
                continue;
            }
            bool child_tight = false;
            if (tight) {
                const AgentId bound = (*bound_)[static_cast<std::size_t>(depth + 1)];
                if (v < bound) {
                    continue;
                }
                child_tight = v == bound;
            }
            prefix_.push_back(v);
            visited_ |= agent_bit(v);
            if (search(child_tight)) {
                return true;
            }
            visited_ &= ~agent_bit(v);
            prefix_.pop_back();
        }
        return false;
    }

    const MarkedSubgraph& graph_;
    AgentId from_;
    AgentId to_;
    int dist_[kMaskAgents + 1] = {};
    int target_len_ = 0;
    const Path* bound_ = nullptr;
    Path prefix_;
    std::uint64_t visited_ = 0;
};

} // namespace

std::optional<Path> next_simple_path(const MarkedSubgraph& graph, AgentId from, AgentId to, const Path* after) {
    if (!graph.contains(from) || !graph.contains(to)) {
        return std::nullopt;
    }
    SimplePathSearch search(graph, from, to);
    return search.after(after);
}

const Path* PathDetectionOutput::first_path(AgentId owner) const {
    for (const auto& p : processed) {
        if (p.owner == owner) {
            return &p.path;
        }
    }
    return nullptr;
}

PathDetectionOutput path_detection(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                   const FavoritePointingGraph& pointing, const Ordering& ordering,
                                   std::span<const AgentId> eligible) {
    PathDetectionOutput out;
    out.component = minimum_closed_component(cycle, graph, pointing, eligible);
    if (out.component.empty()) {
        return out;
    }
    out.marked = MarkedSubgraph(graph, out.component);
    auto& marked = out.marked;

    for (AgentId i : out.component) {
        if (pointing.pointer(i) == i) {
            for (AgentId v : marked.out(i)) {
                marked.mark(i, v, i);
            }
        }
    }

    struct Pending {
        AgentId owner;
        Path path;
    };
    std::vector<Pending> pending;
    for (AgentId i : out.component) {
        auto first = next_simple_path(marked, i, pointing.pointer(i), nullptr);
        if (first) {
            pending.push_back({i, std::move(*first)});
        }
    }

    auto before = [&](const Pending& a, const Pending& b) {
        if (a.path.size() != b.path.size()) {
            return a.path.size() < b.path.size();
        }
        return ordering.position_of(a.owner) < ordering.position_of(b.owner);
    };

    while (!pending.empty()) {
        auto it = std::min_element(pending.begin(), pending.end(), before);
        Pending current = std::move(*it);
        pending.erase(it);

        bool shared = false;
        for (std::size_t k = 0; k + 1 < current.path.size(); ++k) {
            marked.mark(current.path[k], current.path[k + 1], current.owner);
            if (marked.mark_mask(current.path[k], current.path[k + 1]) & ~agent_bit(current.owner)) {
                shared = true;
            }
        }
        out.processed.push_back({current.owner, current.path, shared});
        if (shared) {
            auto next = next_simple_path(marked, current.owner, pointing.pointer(current.owner), &current.path);
            if (next) {
                pending.push_back({current.owner, std::move(*next)});
            }
        }
    }
    return out;
}

PathDetectionOutput path_detection(std::span<const AgentId> cycle, const ReportedGraph& graph,
                                   const FavoritePointingGraph& pointing, const Ordering& ordering) {
    const auto members = pointing.members();
    return path_detection(cycle, graph, pointing, ordering, members);
}

bool has_exclusive_path(const MarkedSubgraph& marked, AgentId owner, AgentId from, AgentId to) {
    if (from == to) {
        return marked.contains(from);
    }
    if (!marked.contains(from) || !marked.contains(to)) {
        return false;
    }
    const std::uint64_t own = agent_bit(owner);
    std::uint64_t seen = agent_bit(from);
    std::vector<AgentId> stack{from};
    while (!stack.empty()) {
        const AgentId u = stack.back();
        stack.pop_back();
        for (AgentId v : marked.out(u)) {
            if ((seen & agent_bit(v)) || marked.mark_mask(u, v) != own) {
                continue;
            }
            if (v == to) {
                return true;
            }
            seen |= agent_bit(v);
            stack.push_back(v);
        }
    }
    return false;
}

std::vector<AgentId> stuck_agents(const PathDetectionOutput& detection, const FavoritePointingGraph& pointing) {
    std::vector<AgentId> result;
    const auto& marked = detection.marked;
    for (AgentId i : detection.component) {
        if (has_exclusive_path(marked, i, i, pointing.pointer(i))) {
            continue;
        }
        bool clean = true;
        for (AgentId v : marked.out(i)) {
            if (marked.mark_mask(i, v) & ~agent_bit(i)) {
                clean = false;
                break;
            }
        }
        if (clean) {
            result.push_back(i);
        }
    }
    return result;
}

} // namespace netswap
