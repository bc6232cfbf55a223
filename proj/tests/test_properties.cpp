#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "netswap/connected_cycles.hpp"
#include "netswap/genio.hpp"
#include "netswap/mechanisms.hpp"
#include "netswap/verify.hpp"
#include "support.hpp"

using namespace netswap;

namespace {

using Agents = std::vector<AgentId>;

const MechanismKind kAll[] = {MechanismKind::TTC, MechanismKind::SWN, MechanismKind::LS, MechanismKind::CTC};
const MechanismKind kNetworked[] = {MechanismKind::SWN, MechanismKind::LS, MechanismKind::CTC};

// Straightforward double-loop definitions, written without the library's search code.
class NaiveOracle {
public:
    explicit NaiveOracle(const Instance& inst) : inst_(inst), n_(inst.size()) {
        edge_.assign(static_cast<std::size_t>(n_ * n_), 0);
        for (AgentId i = 1; i <= n_; ++i) {
            for (AgentId j : inst.truth(i).neighbors) {
                edge_[idx(i, j)] = 1;
            }
        }
        qualified_.assign(static_cast<std::size_t>(n_ + 1), 0);
        for (AgentId i : inst.initial()) {
            qualified_[static_cast<std::size_t>(i)] = 1;
        }
        for (bool grew = true; grew;) {
            grew = false;
            for (AgentId i = 1; i <= n_; ++i) {
                for (AgentId j = 1; j <= n_; ++j) {
                    if (qualified_[static_cast<std::size_t>(i)] && edge_[idx(i, j)] && !qualified_[static_cast<std::size_t>(j)]) {
                        qualified_[static_cast<std::size_t>(j)] = 1;
                        grew = true;
                    }
                }
            }
        }
    }

    enum class Family { Any, Complete, Weak };

    bool optimal(const Allocation& a, Family family) const {
        for (const Allocation& b : test::all_allocations(n_)) {
            Agents changed;
            bool ok = true;
            for (AgentId i = 1; i <= n_ && ok; ++i) {
                if (b.house_of(i) == a.house_of(i)) {
                    continue;
                }
                ok = qualified(i) && rank(i, b.house_of(i)) < rank(i, a.house_of(i));
                changed.push_back(i);
            }
            if (ok && !changed.empty() && in_family(changed, family)) {
                return false;
            }
        }
        return true;
    }

    bool stable(const Allocation& a, Family family) const {
        for (std::uint32_t mask = 1; mask < (1U << n_); ++mask) {
            Agents s;
            bool ok = true;
            for (AgentId i = 1; i <= n_; ++i) {
                if (mask >> (i - 1) & 1U) {
                    s.push_back(i);
                    ok = ok && qualified(i);
                }
            }
            if (!ok || !in_family(s, family)) {
                continue;
            }
            Agents h = s;
            do {
                bool weak = true;
                bool strict = false;
                for (std::size_t k = 0; k < s.size(); ++k) {
                    weak = weak && rank(s[k], h[k]) <= rank(s[k], a.house_of(s[k]));
                    strict = strict || rank(s[k], h[k]) < rank(s[k], a.house_of(s[k]));
                }
                if (weak && strict) {
                    return false;
                }
            } while (std::next_permutation(h.begin(), h.end()));
        }
        return true;
    }

    bool individually_rational(const Allocation& a) const {
        for (AgentId i = 1; i <= n_; ++i) {
            if (rank(i, a.house_of(i)) > rank(i, i)) {
                return false;
            }
        }
        return true;
    }

private:
    std::size_t idx(AgentId i, AgentId j) const { return static_cast<std::size_t>((i - 1) * n_ + (j - 1)); }
    bool qualified(AgentId i) const { return qualified_[static_cast<std::size_t>(i)] != 0; }
    int rank(AgentId i, AgentId h) const { return inst_.truth(i).preference.rank(h); }

    bool in_family(const Agents& s, Family family) const {
        if (family == Family::Any) {
            return true;
        }
        int missing_ordered = 0;
        int missing_pairs = 0;
        for (std::size_t x = 0; x < s.size(); ++x) {
            for (std::size_t y = x + 1; y < s.size(); ++y) {
                const bool xy = edge_[idx(s[x], s[y])] != 0;
                const bool yx = edge_[idx(s[y], s[x])] != 0;
                missing_ordered += (xy ? 0 : 1) + (yx ? 0 : 1);
                missing_pairs += (xy && yx) ? 0 : 1;
            }
        }
        if (family == Family::Complete) {
            return missing_ordered == 0;
        }
        // Connected with edges read both ways.
        std::set<AgentId> seen{s.front()};
        for (bool grew = true; grew;) {
            grew = false;
            for (AgentId u : s) {
                for (AgentId v : s) {
                    if (seen.count(u) && !seen.count(v) && (edge_[idx(u, v)] || edge_[idx(v, u)])) {
                        seen.insert(v);
                        grew = true;
                    }
                }
            }
        }
        return missing_pairs <= 1 && seen.size() == s.size();
    }

    const Instance& inst_;
    int n_;
    std::vector<char> edge_;
    std::vector<char> qualified_;
};

void expect_checkers_match_oracle(const Instance& inst) {
    const NaiveOracle oracle(inst);
    using F = NaiveOracle::Family;
    for (const Allocation& a : test::all_allocations(inst.size())) {
        const std::string where = a.to_string() + " on " + serialize_instance(inst);
        EXPECT_EQ(check_po(a, inst).holds, oracle.optimal(a, F::Any)) << where;
        EXPECT_EQ(check_optimal_cc(a, inst).holds, oracle.optimal(a, F::Complete)) << where;
        EXPECT_EQ(check_optimal_wcc(a, inst).holds, oracle.optimal(a, F::Weak)) << where;
        EXPECT_EQ(check_stability(a, inst).holds, oracle.stable(a, F::Any)) << where;
        EXPECT_EQ(check_stable_cc(a, inst).holds, oracle.stable(a, F::Complete)) << where;
        EXPECT_EQ(check_stable_wcc(a, inst).holds, oracle.stable(a, F::Weak)) << where;
        EXPECT_EQ(check_allocation_property(Property::IR, a, inst).holds, oracle.individually_rational(a)) << where;
    }
}

// A random market with one-way reports and a misreporting agent, so qualification differs
// between the reports and the truth.
Instance messy_market(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RawInstance raw = gen_random(n, 0.5, seed).raw();
    for (auto& agent : raw.profiles) {
        Agents kept;
        for (AgentId j : agent.neighbors) {
            if (uniform_below(4, rng) != 0) {
                kept.push_back(j);
            }
        }
        agent.neighbors = kept;
    }
    raw.initial = {static_cast<AgentId>(uniform_below(static_cast<std::uint64_t>(n), rng)) + 1};
    raw.truth = raw.profiles;
    auto& liar = raw.profiles[uniform_below(static_cast<std::uint64_t>(n), rng)];
    if (!liar.neighbors.empty()) {
        liar.neighbors.pop_back();
    }
    return validate_instance(raw);
}

} // namespace

TEST(NaiveOracle, AgreesOnEveryEnumeratedMarketUpToThreeAgents) {
    for (int n = 1; n <= 3; ++n) {
        enumerate_small_markets(n, [](const Instance& inst) {
            expect_checkers_match_oracle(inst);
            return !::testing::Test::HasFailure();
        });
    }
}

TEST(NaiveOracle, AgreesOnMarketsWithUnqualifiedAgentsAndMisreports) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        expect_checkers_match_oracle(messy_market(3, seed));
        expect_checkers_match_oracle(messy_market(4, seed));
    }
}

TEST(IcScan, TableScanMatchesPerInstanceChecksUpToThreeAgents) {
    for (MechanismKind k : kAll) {
        std::uint64_t violations = 0;
        std::uint64_t instances = 0;
        const Mechanism m = make_mechanism(k);
        enumerate_small_markets(1, [&](const Instance& inst) { ++instances; violations += check_ic(m, inst).holds ? 0 : 1; return true; });
        enumerate_small_markets(2, [&](const Instance& inst) { ++instances; violations += check_ic(m, inst).holds ? 0 : 1; return true; });
        enumerate_small_markets(3, [&](const Instance& inst) { ++instances; violations += check_ic(m, inst).holds ? 0 : 1; return true; });
        ScanOptions o;
        o.mechanism = k;
        o.property = Property::IC;
        o.n = 3;
        const ScanReport r = exhaustive_scan(o);
        EXPECT_EQ(r.instances_checked, instances) << mechanism_name(k);
        EXPECT_EQ(r.violations, violations) << mechanism_name(k);
    }
}

TEST(Mechanisms, CompleteNetworksGiveTheSameAllocation) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int n = 2 + static_cast<int>(seed % 5);
        const Instance inst = gen_complete(n, seed);
        const Allocation ttc = run_ttc(inst);
        for (MechanismKind k : kNetworked) {
            EXPECT_EQ(run_mechanism(k, inst), ttc) << mechanism_name(k) << " seed " << seed;
        }
    }
}

TEST(Mechanisms, HousesBelowAnAgentsOwnAreNeverConsulted) {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        const Instance inst = gen_random(6, 0.45, seed);
        for (AgentId i = 1; i <= 6; ++i) {
            Agents ranking = inst.reported(i).preference.ranking();
            const auto own = std::find(ranking.begin(), ranking.end(), i) + 1;
            std::shuffle(own, ranking.end(), rng);
            const Instance shuffled = inst.with_report(i, AgentType{Preference(ranking), inst.reported(i).neighbors});
            for (MechanismKind k : kAll) {
                Trace a;
                Trace b;
                EXPECT_EQ(run_mechanism(k, inst, {}, &a), run_mechanism(k, shuffled, {}, &b))
                    << mechanism_name(k) << " seed " << seed << " agent " << i;
                EXPECT_EQ(a, b);
            }
        }
    }
}

TEST(Mechanisms, SwnAssignsOwnOrNeighborHouses) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance inst = gen_random(8, 0.3, seed);
        const Allocation a = run_swn(inst);
        for (AgentId i = 1; i <= 8; ++i) {
            const auto& r = inst.reported(i).neighbors;
            EXPECT_TRUE(a.house_of(i) == i || std::binary_search(r.begin(), r.end(), a.house_of(i)));
        }
    }
}

TEST(Mechanisms, NetworkedOutcomesAreIndividuallyRationalAndStableCc) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const Instance inst = gen_random(4 + static_cast<int>(seed % 3), 0.5, seed);
        for (MechanismKind k : kNetworked) {
            const Allocation a = run_mechanism(k, inst);
            EXPECT_TRUE(check_allocation_property(Property::IR, a, inst).holds) << mechanism_name(k) << " " << seed;
            EXPECT_TRUE(check_stable_cc(a, inst).holds) << mechanism_name(k) << " " << seed;
        }
    }
}

// CTC falls short of optimal-cc and IC on four-agent stars around one initial agent. These pin
// the smallest counterexamples found by the exhaustive scan.
TEST(Mechanisms, CtcDemotesAnOutsiderThatCouldHaveSwapped) {
    const Instance inst = parse_instance(
        R"({"n":4,"initial":[1],"profiles":{"1":{"pref":[2,3,1,4],"neighbors":[2,3,4]},)"
        R"("2":{"pref":[3,2,1,4],"neighbors":[1]},"3":{"pref":[4,3,1,2],"neighbors":[1]},)"
        R"("4":{"pref":[3,1,4,2],"neighbors":[1]}}})");
    const Allocation a = run_ctc(inst);
    EXPECT_EQ(a, Allocation({3, 2, 4, 1}));
    const PropertyReport r = check_optimal_cc(a, inst);
    ASSERT_FALSE(r.holds);
    EXPECT_EQ(std::get<DominationWitness>(*r.witness).changed, (std::vector<AgentId>{1, 2}));
}

TEST(Mechanisms, CtcRewardsPromotingAContestedHouse) {
    const Instance inst = parse_instance(
        R"({"n":4,"initial":[1],"profiles":{"1":{"pref":[2,1,3,4],"neighbors":[2,3,4]},)"
        R"("2":{"pref":[3,1,2,4],"neighbors":[1]},"3":{"pref":[2,4,1,3],"neighbors":[1]},)"
        R"("4":{"pref":[3,1,2,4],"neighbors":[1]}}})");
    EXPECT_EQ(run_ctc(inst).house_of(3), 3);
    AgentType lie = inst.reported(3);
    lie.preference = Preference({1, 3, 2, 4});
    EXPECT_EQ(run_ctc(inst.with_report(3, lie)).house_of(3), 1);
    EXPECT_FALSE(check_ic(make_mechanism(MechanismKind::CTC), inst).holds);
}

TEST(Mechanisms, TtcOnFullyQualifiedMarketsIsTheStrictCore) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Instance inst = gen_random(5, 0.5, seed).with_initial({1, 2, 3, 4, 5});
        const Allocation a = run_ttc(inst);
        EXPECT_TRUE(check_stability(a, inst).holds);
        EXPECT_TRUE(check_po(a, inst).holds);
    }
}

TEST(Witnesses, EveryViolationReplays) {
    int ic = 0;
    int domination = 0;
    int coalition = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const Instance inst = gen_random(4, 0.5, seed);
        const Mechanism ttc = make_mechanism(MechanismKind::TTC);
        const PropertyReport r = check_ic(ttc, inst);
        if (!r.holds) {
            ++ic;
            EXPECT_TRUE(replay_witness(r, ttc, inst, {}));
        }
        for (MechanismKind k : {MechanismKind::SWN, MechanismKind::LS}) {
            const Allocation a = run_mechanism(k, inst);
            for (Property p : {Property::OptimalCC, Property::PO, Property::Stability, Property::OptimalWCC,
                               Property::StableWCC}) {
                const PropertyReport pr = check_allocation_property(p, a, inst);
                if (!pr.holds) {
                    std::holds_alternative<CoalitionWitness>(*pr.witness) ? ++coalition : ++domination;
                    EXPECT_TRUE(replay_witness(pr, {}, inst, a)) << property_name(p) << " seed " << seed;
                }
            }
        }
    }
    EXPECT_GT(ic, 0);
    EXPECT_GT(domination, 0);
    EXPECT_GT(coalition, 0);
}

TEST(Hierarchy, StrongerNotionsImplyWeakerOnRandomFiveAgentMarkets) {
    bool separated = false;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Instance inst = gen_random(5, 0.5, seed);
        const AllocationSurvey s = survey_allocations(inst);
        for (std::size_t k = 0; k < s.size(); ++k) {
            auto h = [&](Property p) { return s.holds(k, p); };
            EXPECT_TRUE(!h(Property::Stability) || h(Property::PO));
            EXPECT_TRUE(!h(Property::Stability) || h(Property::StableWCC));
            EXPECT_TRUE(!h(Property::StableWCC) || h(Property::StableCC));
            EXPECT_TRUE(!h(Property::PO) || h(Property::OptimalWCC));
            EXPECT_TRUE(!h(Property::OptimalWCC) || h(Property::OptimalCC));
            separated = separated || (h(Property::StableCC) && !h(Property::OptimalCC));
        }
    }
    EXPECT_TRUE(separated);
}

TEST(Model, QualificationIsMonotoneInEdges) {
    std::mt19937_64 rng(9);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance inst = gen_random(7, 0.25, seed);
        ReportedGraph g = build_reported_graph(inst);
        const auto initial = inst.initial();
        const auto before = qualified_set(g, initial);
        const AgentId a = static_cast<AgentId>(uniform_below(7, rng)) + 1;
        const AgentId b = static_cast<AgentId>(uniform_below(7, rng)) + 1;
        if (a != b && !g.has_edge(a, b)) {
            g.add_edge(a, b);
        }
        const auto after = qualified_set(g, initial);
        EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
}

TEST(Model, QualificationIsTheReachabilityFixedPoint) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance inst = messy_market(7, seed);
        const ReportedGraph g = build_reported_graph(inst);
        std::set<AgentId> fixed(inst.initial().begin(), inst.initial().end());
        for (bool grew = true; grew;) {
            grew = false;
            for (auto [i, j] : g.edges()) {
                if (fixed.count(i) && fixed.insert(j).second) {
                    grew = true;
                }
            }
        }
        const auto initial = inst.initial();
        EXPECT_EQ(qualified_set(g, initial), Agents(fixed.begin(), fixed.end()));
    }
}

TEST(Model, OrderingIsSortedByDistanceAndInvertible) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance inst = messy_market(8, seed);
        const ReportedGraph g = build_reported_graph(inst);
        const auto initial = inst.initial();
        for (const TieRule& rule : {TieRule::by_id(), TieRule::shuffled(seed)}) {
            const Ordering o = compute_ordering(g, initial, rule);
            Agents sorted = o.sequence;
            std::sort(sorted.begin(), sorted.end());
            EXPECT_EQ(sorted, qualified_set(g, initial));
            for (std::size_t k = 0; k < o.sequence.size(); ++k) {
                EXPECT_EQ(o.position_of(o.sequence[k]), static_cast<int>(k));
                if (k > 0) {
                    EXPECT_LE(o.distance_of(o.sequence[k - 1]), o.distance_of(o.sequence[k]));
                }
            }
        }
    }
}

TEST(Model, FavoriteOfAUnionIsOneOfTwo) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        Agents ranking(8);
        std::iota(ranking.begin(), ranking.end(), 1);
        std::shuffle(ranking.begin(), ranking.end(), rng);
        const Preference p(ranking);
        Agents set;
        for (AgentId h = 1; h <= 8; ++h) {
            if (uniform_below(2, rng)) {
                set.push_back(h);
            }
        }
        if (set.empty()) {
            continue;
        }
        const AgentId x = static_cast<AgentId>(uniform_below(8, rng)) + 1;
        Agents with = set;
        with.push_back(x);
        const AgentId best = favorite_in(p, with);
        EXPECT_TRUE(best == x || best == favorite_in(p, set));
    }
}

TEST(Genio, GeneratedMarketsRoundTrip) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        for (const Instance& inst : {gen_random(6, 0.4, seed), gen_tree(6, seed), gen_line(5, seed),
                                     gen_complete(4, seed), messy_market(5, seed)}) {
            EXPECT_EQ(parse_instance(serialize_instance(inst)), inst);
        }
    }
}
