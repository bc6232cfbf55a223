#include <gtest/gtest.h>

#include "netswap/connected_cycles.hpp"
#include "netswap/genio.hpp"
#include "support.hpp"

using namespace netswap;

namespace {

using Agents = std::vector<AgentId>;

struct Walkthrough {
    Instance instance = paper_fixture("appendixA").instance;
    ReportedGraph graph = build_reported_graph(instance);
    Agents qualified = qualified_set(graph, instance.initial());
    Ordering ordering = compute_ordering(graph, instance.initial());

    FavoritePointingGraph pointing(std::initializer_list<std::pair<AgentId, AgentId>> pointers) const {
        FavoritePointingGraph f(instance.size());
        for (auto [from, to] : pointers) {
            f.set_pointer(from, to);
        }
        return f;
    }
};

Agents pointers_of(const FavoritePointingGraph& f) {
    Agents out;
    for (AgentId i = 1; i <= f.size(); ++i) {
        out.push_back(f.pointer(i));
    }
    return out;
}

} // namespace

TEST(FavoritePointing, AppendixAInitialPointers) {
    const Walkthrough w;
    EXPECT_EQ(pointers_of(build_favorite_pointing(w.instance, w.qualified)), (Agents{5, 4, 1, 2, 1, 3}));
}

TEST(FavoritePointing, Fig6AllQualified) {
    const Instance inst = paper_fixture("fig6").instance;
    const auto q = qualified_set(build_reported_graph(inst), inst.initial());
    ASSERT_EQ(q, (Agents{1, 2, 3, 4, 5}));
    EXPECT_EQ(pointers_of(build_favorite_pointing(inst, q)), (Agents{5, 3, 4, 1, 3}));
}

TEST(FavoritePointing, SingletonPointsAtHerself) {
    const Instance inst = gen_line(3).with_initial({2});
    const Agents only{2};
    const FavoritePointingGraph f = build_favorite_pointing(inst, only);
    EXPECT_EQ(f.pointer(2), 2);
    EXPECT_FALSE(f.contains(1));
    EXPECT_EQ(f.members(), (Agents{2}));
}

TEST(NextFavorite, AppendixASwitches) {
    const Walkthrough w;
    EXPECT_EQ(next_favorite(w.instance.reported(2).preference, 4, w.qualified), 1);
    EXPECT_EQ(next_favorite(w.instance.reported(5).preference, 3, w.qualified), 4);
}

TEST(NextFavorite, SkipsUnqualifiedHousesAndStopsAtTheBottom) {
    const Preference p({4, 1, 2, 3});
    const Agents q{1, 2, 4};
    EXPECT_EQ(next_favorite(Preference({1, 2}), 1, Agents{1, 2}), 2);
    EXPECT_EQ(next_favorite(p, 4, q), 1);
    EXPECT_EQ(next_favorite(p, 1, q), 2);
    EXPECT_EQ(next_favorite(Preference({3, 1, 2}), 3, Agents{2, 3}), 2);
    try {
        next_favorite(Preference({1, 2}), 2, Agents{1, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoLowerCandidate);
    }
}

TEST(DetectCycle, AppendixAFirstAndThirdIterations) {
    const Walkthrough w;
    const auto first = detect_cycle_from(1, w.pointing({{1, 5}, {2, 4}, {3, 1}, {4, 2}, {5, 1}, {6, 3}}));
    EXPECT_EQ(first.walk, (Agents{1, 5}));
    EXPECT_EQ(first.cycle, (Agents{1, 5}));
    const auto third = detect_cycle_from(1, w.pointing({{1, 5}, {2, 1}, {3, 1}, {4, 2}, {5, 3}, {6, 3}}));
    EXPECT_EQ(third.walk, (Agents{1, 5, 3}));
    EXPECT_EQ(third.cycle, (Agents{1, 5, 3}));
}

TEST(DetectCycle, WalkWithTailAndSelfLoop) {
    const Walkthrough w;
    const auto tail = detect_cycle_from(6, w.pointing({{1, 5}, {2, 4}, {3, 1}, {4, 2}, {5, 1}, {6, 3}}));
    EXPECT_EQ(tail.walk, (Agents{6, 3, 1, 5}));
    EXPECT_EQ(tail.cycle, (Agents{1, 5}));
    const auto self = detect_cycle_from(4, w.pointing({{4, 4}}));
    EXPECT_EQ(self.walk, (Agents{4}));
    EXPECT_EQ(self.cycle, (Agents{4}));
}

TEST(MinimumClosedComponent, AppendixAFirstCycle) {
    const Walkthrough w;
    const auto f = w.pointing({{1, 5}, {2, 4}, {3, 1}, {4, 2}, {5, 1}, {6, 3}});
    EXPECT_EQ(minimum_closed_component(Agents{1, 5}, w.graph, f), (Agents{1, 2, 4, 5}));
}

TEST(MinimumClosedComponent, ConnectedCycleIsItsOwnComponent) {
    const Instance inst = gen_complete(4);
    const ReportedGraph g = build_reported_graph(inst);
    FavoritePointingGraph f(4);
    f.set_pointer(1, 3);
    f.set_pointer(3, 1);
    f.set_pointer(2, 1);
    f.set_pointer(4, 2);
    EXPECT_EQ(minimum_closed_component(Agents{1, 3}, g, f), (Agents{1, 3}));
}

TEST(MinimumClosedComponent, DisconnectedLeftoversHaveNone) {
    const Walkthrough w;
    const auto f = w.pointing({{3, 6}, {6, 3}});
    EXPECT_TRUE(minimum_closed_component(Agents{3, 6}, w.graph, f, Agents{3, 6}).empty());
}

TEST(PathDetection, AppendixAFirstIterationSeesTwoStuckAgents) {
    const Walkthrough w;
    const auto f = w.pointing({{1, 5}, {2, 4}, {3, 1}, {4, 2}, {5, 1}, {6, 3}});
    const auto out = path_detection(Agents{1, 5}, w.graph, f, w.ordering);
    EXPECT_EQ(out.component, (Agents{1, 2, 4, 5}));
    EXPECT_EQ(stuck_agents(out, f), (Agents{2, 5}));
}

TEST(PathDetection, AppendixASecondIterationPathsAndStuckSet) {
    const Walkthrough w;
    const auto f = w.pointing({{1, 5}, {2, 1}, {3, 1}, {4, 2}, {5, 1}, {6, 3}});
    const auto out = path_detection(Agents{1, 5}, w.graph, f, w.ordering);
    ASSERT_EQ(out.component, (Agents{1, 2, 4, 5}));
    ASSERT_NE(out.first_path(2), nullptr);
    EXPECT_EQ(*out.first_path(2), (Path{2, 1}));
    EXPECT_EQ(*out.first_path(1), (Path{1, 4, 5}));
    EXPECT_EQ(*out.first_path(4), (Path{4, 1, 2}));
    EXPECT_EQ(*out.first_path(5), (Path{5, 4, 1}));
    EXPECT_EQ(out.processed.front().path, (Path{2, 1}));
    EXPECT_EQ(stuck_agents(out, f), (Agents{5}));
    EXPECT_FALSE(has_exclusive_path(out.marked, 5, 5, 1));
    EXPECT_TRUE(has_exclusive_path(out.marked, 2, 2, 1));
}

TEST(PathDetection, AppendixAThirdIterationHasNoStuckAgent) {
    const Walkthrough w;
    const auto f = w.pointing({{1, 5}, {2, 1}, {3, 1}, {4, 2}, {5, 3}, {6, 3}});
    const auto out = path_detection(Agents{1, 5, 3}, w.graph, f, w.ordering);
    EXPECT_EQ(out.component, (Agents{1, 2, 3, 4, 5}));
    EXPECT_TRUE(stuck_agents(out, f).empty());
}

TEST(PathDetection, SelfPointerMarksHerOutgoingEdges) {
    const Walkthrough w;
    const auto f = w.pointing({{1, 1}});
    const auto out = path_detection(Agents{1}, w.graph, f, w.ordering);
    EXPECT_EQ(out.component, (Agents{1}));
    EXPECT_TRUE(stuck_agents(out, f).empty());
}

TEST(MarkedSubgraph, MarksAccumulateOnPresentEdges) {
    const Walkthrough w;
    MarkedSubgraph m(w.graph, Agents{1, 2, 4});
    EXPECT_TRUE(m.has_edge(1, 4));
    EXPECT_FALSE(m.has_edge(2, 4));
    m.mark(1, 4, 4);
    m.mark(1, 4, 2);
    m.mark(1, 4, 4);
    EXPECT_EQ(m.marks(1, 4), (Agents{2, 4}));
    EXPECT_EQ(m.mark_mask(1, 4), agent_bit(2) | agent_bit(4));
    EXPECT_TRUE(m.marks(4, 1).empty());
}

TEST(NextSimplePath, LengthThenLexicographicOrder) {
    const Instance inst = gen_complete(4);
    const MarkedSubgraph m(build_reported_graph(inst), Agents{1, 2, 3, 4});
    std::vector<Path> seen;
    const Path* after = nullptr;
    std::optional<Path> p;
    while ((p = next_simple_path(m, 1, 4, after))) {
        seen.push_back(*p);
        after = &seen.back();
        if (seen.size() > 10) {
            break;
        }
    }
    const std::vector<Path> expected{{1, 4}, {1, 2, 4}, {1, 3, 4}, {1, 2, 3, 4}, {1, 3, 2, 4}};
    EXPECT_EQ(seen, expected);
}
