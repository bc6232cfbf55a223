#include "netswap/verify.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <bit>
#include <map>
#include <numeric>
#include <random>

#include "json.hpp"
#include "netswap/genio.hpp"

namespace netswap {

namespace {

constexpr std::array<std::pair<Property, std::string_view>, 8> kPropertyNames{{
    {Property::IR, "ir"},
    {Property::IC, "ic"},
    {Property::PO, "po"},
    {Property::Stability, "stability"},
    {Property::StableCC, "stable-cc"},
    {Property::OptimalCC, "optimal-cc"},
    {Property::StableWCC, "stable-wcc"},
    {Property::OptimalWCC, "optimal-wcc"},
}};

std::size_t at(AgentId i) { return static_cast<std::size_t>(i - 1); }

// Which coalitions may block or which changed sets may improve.
enum class Family { Any, Complete, WeaklyComplete };

// The market as the checkers see it: true preferences, true network, its qualified agents.
struct TruthView {
    explicit TruthView(const Instance& instance)
        : instance(instance), graph(instance.truth_profile()),
          qualified(qualified_set(graph, instance.initial())) {}

    const Preference& pref(AgentId i) const { return instance.truth(i).preference; }

    const Instance& instance;
    ReportedGraph graph;
    std::vector<AgentId> qualified;
};

bool admits(Family family, const ReportedGraph& graph, std::span<const AgentId> agents) {
    switch (family) {
    case Family::Any: return true;
    case Family::Complete: return is_complete_component(graph, agents);
    case Family::WeaklyComplete: return is_weakly_complete_component(graph, agents);
    }
    return false;
}

void require_size(const Instance& instance, int cap, const char* what) {
    if (instance.size() > cap) {
        throw Error(ErrorCode::CapExceeded, std::string(what) + " is capped at " + std::to_string(cap) +
                                                " agents, got " + std::to_string(instance.size()));
    }
}

// An alternative allocation that weakly improves every qualified agent, changes someone, and
// whose changed set belongs to `family`. Houses come from those the qualified agents hold.
PropertyReport find_domination(Property property, Family family, const Allocation& allocation,
                               const Instance& instance, const VerifyCaps& caps) {
    require_size(instance, caps.max_n, "allocation checks");
    const TruthView view(instance);
    PropertyReport report{property, true, std::nullopt, 0, {}};
    const int n = instance.size();
    std::vector<char> pool(at(n + 1), 0);
    for (AgentId i : view.qualified) {
        pool[at(allocation.house_of(i))] = 1;
    }
    std::vector<AgentId> houses = allocation.houses();
    std::vector<char> used(at(n + 1), 0);
    const auto& agents = view.qualified;

    std::function<bool(std::size_t)> extend = [&](std::size_t k) {
        if (k == agents.size()) {
            ++report.work;
            std::vector<AgentId> changed;
            for (AgentId i : agents) {
                if (houses[at(i)] != allocation.house_of(i)) {
                    changed.push_back(i);
                }
            }
            if (!changed.empty() && admits(family, view.graph, changed)) {
                report.holds = false;
                report.witness = DominationWitness{Allocation(houses), std::move(changed)};
                return true;
            }
            return false;
        }
        const AgentId i = agents[k];
        const Preference& pref = view.pref(i);
        for (AgentId h : pref.ranking()) {
            if (pref.prefers(allocation.house_of(i), h)) {
                break;
            }
            if (!pool[at(h)] || used[at(h)]) {
                continue;
            }
            used[at(h)] = 1;
            houses[at(i)] = h;
            if (extend(k + 1)) {
                return true;
            }
            used[at(h)] = 0;
        }
        houses[at(i)] = allocation.house_of(i);
        return false;
    };
    extend(0);
    return report;
}

// A coalition of qualified agents from `family` that can reassign its own endowments so that
// everyone weakly gains and someone strictly gains.
PropertyReport find_blocking(Property property, Family family, const Allocation& allocation, const Instance& instance,
                             const VerifyCaps& caps) {
    require_size(instance, caps.max_n, "allocation checks");
    const TruthView view(instance);
    PropertyReport report{property, true, std::nullopt, 0, {}};
    const auto& q = view.qualified;
    const std::uint64_t subsets = std::uint64_t{1} << q.size();
    std::vector<AgentId> coalition;
    std::vector<AgentId> assigned;
    std::vector<char> used;

    for (std::uint64_t mask = 1; mask < subsets; ++mask) {
        coalition.clear();
        for (std::size_t k = 0; k < q.size(); ++k) {
            if (mask >> k & 1U) {
                coalition.push_back(q[k]);
            }
        }
        if (!admits(family, view.graph, coalition)) {
            continue;
        }
        assigned.assign(coalition.size(), 0);
        used.assign(coalition.size(), 0);
        std::function<bool(std::size_t, bool)> extend = [&](std::size_t k, bool strict) {
            if (k == coalition.size()) {
                ++report.work;
                return strict;
            }
            const AgentId i = coalition[k];
            const Preference& pref = view.pref(i);
            const AgentId current = allocation.house_of(i);
            for (std::size_t m = 0; m < coalition.size(); ++m) {
                const AgentId h = coalition[m];
                if (used[m] || pref.prefers(current, h)) {
                    continue;
                }
                used[m] = 1;
                assigned[k] = h;
                if (extend(k + 1, strict || h != current)) {
                    return true;
                }
                used[m] = 0;
            }
            return false;
        };
        if (extend(0, false)) {
            report.holds = false;
            report.witness = CoalitionWitness{coalition, assigned};
            return report;
        }
    }
    return report;
}

std::vector<std::vector<AgentId>> subsets_by_size(const std::vector<AgentId>& items) {
    std::vector<std::vector<AgentId>> out;
    const std::uint64_t count = std::uint64_t{1} << items.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        std::vector<AgentId> subset;
        for (std::size_t k = 0; k < items.size(); ++k) {
            if (mask >> k & 1U) {
                subset.push_back(items[k]);
            }
        }
        out.push_back(std::move(subset));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    return out;
}

std::vector<AgentId> prefix_through(const std::vector<AgentId>& ranking, AgentId self) {
    auto end = std::find(ranking.begin(), ranking.end(), self);
    return {ranking.begin(), end + 1};
}

std::vector<std::vector<AgentId>> misreport_rankings(int n, AgentId self, const std::vector<AgentId>& truth,
                                                     bool prefix_only) {
    std::vector<std::vector<AgentId>> out{truth};
    if (prefix_only) {
        const auto true_prefix = prefix_through(truth, self);
        for (auto& r : truncated_rankings(n, self)) {
            if (prefix_through(r, self) != true_prefix) {
                out.push_back(std::move(r));
            }
        }
        return out;
    }
    std::vector<AgentId> r(static_cast<std::size_t>(n));
    std::iota(r.begin(), r.end(), 1);
    do {
        if (r != truth) {
            out.push_back(r);
        }
    } while (std::next_permutation(r.begin(), r.end()));
    return out;
}

bool is_connected(const ReportedGraph& graph, std::span<const AgentId> agents) {
    if (agents.empty()) {
        return false;
    }
    std::vector<char> seen(agents.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < agents.size(); ++v) {
            if (!seen[v] && (graph.has_edge(agents[u], agents[v]) || graph.has_edge(agents[v], agents[u]))) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == agents.size();
}

std::vector<std::vector<AgentId>> enumerate_family(const ReportedGraph& graph, Family family) {
    const int n = graph.size();
    if (n > 20) {
        throw Error(ErrorCode::CapExceeded, "component enumeration is capped at 20 agents");
    }
    std::vector<std::vector<AgentId>> out;
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
        std::vector<AgentId> members;
        for (int k = 0; k < n; ++k) {
            if (mask >> k & 1U) {
                members.push_back(k + 1);
            }
        }
        if (admits(family, graph, members)) {
            out.push_back(std::move(members));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

} // namespace

std::string_view property_name(Property property) {
    for (const auto& [p, name] : kPropertyNames) {
        if (p == property) {
            return name;
        }
    }
    return "unknown";
}

std::optional<Property> parse_property(std::string_view name) {
    for (const auto& [p, text] : kPropertyNames) {
        if (text == name) {
            return p;
        }
    }
    return std::nullopt;
}

const std::vector<Property>& all_properties() {
    static const std::vector<Property> all = [] {
        std::vector<Property> out;
        for (const auto& entry : kPropertyNames) {
            out.push_back(entry.first);
        }
        return out;
    }();
    return all;
}

Mechanism make_mechanism(MechanismKind kind, const TieRule& tie_rule) {
    return [kind, tie_rule](const Instance& instance) { return run_mechanism(kind, instance, tie_rule); };
}

bool is_complete_component(const ReportedGraph& graph, std::span<const AgentId> agents) {
    for (AgentId a : agents) {
        for (AgentId b : agents) {
            if (a != b && !graph.has_edge(a, b)) {
                return false;
            }
        }
    }
    return !agents.empty();
}

bool is_weakly_complete_component(const ReportedGraph& graph, std::span<const AgentId> agents) {
    int missing = 0;
    for (std::size_t x = 0; x < agents.size(); ++x) {
        for (std::size_t y = x + 1; y < agents.size(); ++y) {
            if (!graph.mutual(agents[x], agents[y]) && ++missing > 1) {
                return false;
            }
        }
    }
    return is_connected(graph, agents);
}

std::vector<std::vector<AgentId>> enumerate_complete_components(const ReportedGraph& graph) {
    return enumerate_family(graph, Family::Complete);
}

std::vector<std::vector<AgentId>> enumerate_weakly_complete_components(const ReportedGraph& graph) {
    return enumerate_family(graph, Family::WeaklyComplete);
}

PropertyReport check_ir(const Mechanism& mechanism, const Instance& instance, const VerifyCaps& caps) {
    PropertyReport report{Property::IR, true, std::nullopt, 0, {}};
    const Instance truthful = instance.truthful();
    const int n = instance.size();

    auto inspect = [&](const Instance& profile, const std::vector<char>& honest) {
        ++report.work;
        const Allocation allocation = mechanism(profile);
        for (AgentId i = 1; i <= n; ++i) {
            const Preference& pref = instance.truth(i).preference;
            if (honest[at(i)] && pref.prefers(i, allocation.house_of(i))) {
                report.holds = false;
                report.witness = IrWitness{i, allocation.house_of(i), profile};
                return true;
            }
        }
        return false;
    };

    if (!caps.enumerate_neighbors || n > caps.max_ir_enumeration_n) {
        report.scope = "truthful profile";
        inspect(truthful, std::vector<char>(at(n + 1), 1));
        return report;
    }

    // Every combination of neighbor subsets; agents whose subset is the full truth are judged.
    report.scope = "all neighbor-subset report profiles";
    std::vector<std::vector<std::vector<AgentId>>> options;
    for (AgentId i = 1; i <= n; ++i) {
        options.push_back(subsets_by_size(instance.truth(i).neighbors));
    }
    std::vector<std::size_t> choice(at(n + 1), 0);
    while (true) {
        RawInstance raw = truthful.raw();
        std::vector<char> honest(at(n + 1), 0);
        for (AgentId i = 1; i <= n; ++i) {
            raw.profiles[at(i)].neighbors = options[at(i)][choice[at(i)]];
            honest[at(i)] = choice[at(i)] == 0;
        }
        raw.truth = truthful.raw().profiles;
        if (inspect(validate_instance(raw), honest)) {
            return report;
        }
        int k = n - 1;
        while (k >= 0 && ++choice[static_cast<std::size_t>(k)] == options[static_cast<std::size_t>(k)].size()) {
            choice[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) {
            break;
        }
    }
    return report;
}

PropertyReport check_ic(const Mechanism& mechanism, const Instance& instance, const VerifyCaps& caps) {
    require_size(instance, caps.max_ic_n, "incentive compatibility checks");
    PropertyReport report{Property::IC, true, std::nullopt, 0, {}};
    report.scope = std::string(caps.prefix_misreports ? "rankings above own house" : "all rankings") +
                   (caps.enumerate_neighbors ? " x all neighbor subsets" : " x true neighbors");
    const int n = instance.size();
    for (AgentId i = 1; i <= n; ++i) {
        const AgentType& truth = instance.truth(i);
        const Instance honest = instance.with_report(i, truth);
        // Reports by an agent nobody reaches cannot reach anyone either.
        const auto q = qualified_set(build_reported_graph(honest), honest.initial());
        if (!std::binary_search(q.begin(), q.end(), i)) {
            continue;
        }
        const AgentId truthful_house = mechanism(honest).house_of(i);
        const auto rankings = misreport_rankings(n, i, truth.preference.ranking(), caps.prefix_misreports);
        const auto neighbor_options =
            caps.enumerate_neighbors ? subsets_by_size(truth.neighbors) : std::vector<std::vector<AgentId>>{truth.neighbors};
        for (const auto& neighbors : neighbor_options) {
            for (std::size_t r = 0; r < rankings.size(); ++r) {
                if (r == 0 && neighbors == truth.neighbors) {
                    continue;
                }
                AgentType report_type{Preference(rankings[r]), neighbors};
                ++report.work;
                const AgentId gained = mechanism(instance.with_report(i, report_type)).house_of(i);
                if (truth.preference.prefers(gained, truthful_house)) {
                    report.holds = false;
                    report.witness = MisreportWitness{i, std::move(report_type), truthful_house, gained};
                    return report;
                }
            }
        }
    }
    return report;
}

PropertyReport check_po(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps) {
    return find_domination(Property::PO, Family::Any, allocation, instance, caps);
}

PropertyReport check_optimal_cc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps) {
    return find_domination(Property::OptimalCC, Family::Complete, allocation, instance, caps);
}

PropertyReport check_optimal_wcc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps) {
    return find_domination(Property::OptimalWCC, Family::WeaklyComplete, allocation, instance, caps);
}

PropertyReport check_stability(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps) {
    return find_blocking(Property::Stability, Family::Any, allocation, instance, caps);
}

PropertyReport check_stable_cc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps) {
    return find_blocking(Property::StableCC, Family::Complete, allocation, instance, caps);
}

PropertyReport check_stable_wcc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps) {
    return find_blocking(Property::StableWCC, Family::WeaklyComplete, allocation, instance, caps);
}

PropertyReport check_allocation_property(Property property, const Allocation& allocation, const Instance& instance,
                                         const VerifyCaps& caps) {
    switch (property) {
    case Property::PO: return check_po(allocation, instance, caps);
    case Property::Stability: return check_stability(allocation, instance, caps);
    case Property::StableCC: return check_stable_cc(allocation, instance, caps);
    case Property::OptimalCC: return check_optimal_cc(allocation, instance, caps);
    case Property::StableWCC: return check_stable_wcc(allocation, instance, caps);
    case Property::OptimalWCC: return check_optimal_wcc(allocation, instance, caps);
    case Property::IR: {
        PropertyReport report{Property::IR, true, std::nullopt, 1, "given allocation"};
        for (AgentId i = 1; i <= instance.size(); ++i) {
            if (instance.truth(i).preference.prefers(i, allocation.house_of(i))) {
                report.holds = false;
                report.witness = IrWitness{i, allocation.house_of(i), std::nullopt};
                break;
            }
        }
        return report;
    }
    case Property::IC: break;
    }
    throw Error(ErrorCode::InvalidArgument, "incentive compatibility is a property of mechanisms, not allocations");
}

Allocation AllocationSurvey::allocation(std::size_t k) const {
    const auto first = houses_.begin() + static_cast<std::ptrdiff_t>(k * static_cast<std::size_t>(n_));
    return Allocation(std::vector<AgentId>(first, first + n_));
}

bool AllocationSurvey::holds(std::size_t k, Property property) const {
    if (property == Property::IC) {
        throw Error(ErrorCode::InvalidArgument, "incentive compatibility is a property of mechanisms, not allocations");
    }
    return (held_[k] >> static_cast<int>(property) & 1U) != 0;
}

AllocationSurvey survey_allocations(const Instance& instance) {
    constexpr int kMaxSurveyN = 6;
    require_size(instance, kMaxSurveyN, "allocation surveys");
    const TruthView view(instance);
    const int n = instance.size();
    const std::size_t un = static_cast<std::size_t>(n);
    const std::uint32_t full = (1U << n) - 1;

    std::vector<int> rank(un * un);
    for (AgentId i = 1; i <= n; ++i) {
        for (AgentId h = 1; h <= n; ++h) {
            rank[at(i) * un + at(h)] = view.pref(i).rank(h);
        }
    }
    std::uint32_t qualified = 0;
    for (AgentId i : view.qualified) {
        qualified |= 1U << at(i);
    }

    // admitted[mask]: bit 0 any set of agents, bit 1 complete, bit 2 weakly complete.
    std::vector<std::uint8_t> admitted(full + 1, 0);
    std::vector<AgentId> members;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        members.clear();
        for (int k = 0; k < n; ++k) {
            if (mask >> k & 1U) {
                members.push_back(k + 1);
            }
        }
        admitted[mask] = static_cast<std::uint8_t>(1U | (is_complete_component(view.graph, members) ? 2U : 0U) |
                                                   (is_weakly_complete_component(view.graph, members) ? 4U : 0U));
    }

    AllocationSurvey survey;
    survey.n_ = n;
    std::vector<AgentId> perm(un);
    std::iota(perm.begin(), perm.end(), 1);
    do {
        survey.houses_.insert(survey.houses_.end(), perm.begin(), perm.end());
    } while (std::next_permutation(perm.begin(), perm.end()));
    const std::size_t count = survey.houses_.size() / un;
    auto house = [&](std::size_t k, std::size_t i) { return survey.houses_[k * un + i]; };
    auto r = [&](std::size_t i, AgentId h) { return rank[i * un + at(h)]; };

    // Every coalition of qualified agents with every reassignment of its own endowments.
    struct Deviation {
        std::uint32_t coalition;
        std::vector<AgentId> houses; // houses[i] for members, 0 elsewhere
    };
    std::vector<Deviation> deviations;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        if ((mask & ~qualified) != 0) {
            continue;
        }
        std::vector<AgentId> own;
        for (int k = 0; k < n; ++k) {
            if (mask >> k & 1U) {
                own.push_back(k + 1);
            }
        }
        std::vector<AgentId> assignment = own;
        do {
            Deviation d{mask, std::vector<AgentId>(un, 0)};
            for (std::size_t m = 0; m < own.size(); ++m) {
                d.houses[at(own[m])] = assignment[m];
            }
            deviations.push_back(std::move(d));
        } while (std::next_permutation(assignment.begin(), assignment.end()));
    }

    auto bit = [](Property p) { return static_cast<std::uint16_t>(1U << static_cast<int>(p)); };
    survey.held_.assign(count, 0);
    for (std::size_t a = 0; a < count; ++a) {
        std::uint16_t held = 0;
        bool ir = true;
        for (std::size_t i = 0; i < un; ++i) {
            ir = ir && r(i, static_cast<AgentId>(i + 1)) >= r(i, house(a, i));
        }
        if (ir) {
            held |= bit(Property::IR);
        }

        std::uint8_t dominated = 0;
        for (std::size_t b = 0; b < count && dominated != 7; ++b) {
            std::uint32_t changed = 0;
            bool better = true;
            for (std::size_t i = 0; i < un && better; ++i) {
                if (house(a, i) == house(b, i)) {
                    continue;
                }
                changed |= 1U << i;
                better = (qualified >> i & 1U) && r(i, house(b, i)) < r(i, house(a, i));
            }
            if (better && changed != 0) {
                dominated |= admitted[changed];
            }
        }
        held |= (dominated & 1U) ? 0 : bit(Property::PO);
        held |= (dominated & 2U) ? 0 : bit(Property::OptimalCC);
        held |= (dominated & 4U) ? 0 : bit(Property::OptimalWCC);

        std::uint8_t blocked = 0;
        for (const Deviation& d : deviations) {
            bool weak = true;
            bool strict = false;
            for (std::size_t i = 0; i < un && weak; ++i) {
                if (d.houses[i] == 0) {
                    continue;
                }
                const int now = r(i, house(a, i));
                const int then = r(i, d.houses[i]);
                weak = then <= now;
                strict = strict || then < now;
            }
            if (weak && strict) {
                blocked |= admitted[d.coalition];
            }
        }
        held |= (blocked & 1U) ? 0 : bit(Property::Stability);
        held |= (blocked & 2U) ? 0 : bit(Property::StableCC);
        held |= (blocked & 4U) ? 0 : bit(Property::StableWCC);
        survey.held_[a] = held;
    }
    return survey;
}

PropertyReport check_property(Property property, const Mechanism& mechanism, const Instance& instance,
                              const VerifyCaps& caps) {
    switch (property) {
    case Property::IR: return check_ir(mechanism, instance, caps);
    case Property::IC: return check_ic(mechanism, instance, caps);
    default: return check_allocation_property(property, mechanism(instance.truthful()), instance, caps);
    }
}

namespace {

struct Replay {
    const PropertyReport& report;
    const Mechanism& mechanism;
    const Instance& instance;
    const Allocation& allocation;

    Family family() const {
        switch (report.property) {
        case Property::StableCC:
        case Property::OptimalCC: return Family::Complete;
        case Property::StableWCC:
        case Property::OptimalWCC: return Family::WeaklyComplete;
        default: return Family::Any;
        }
    }

    bool operator()(const IrWitness& w) const {
        const Allocation result = w.profile ? mechanism(*w.profile) : allocation;
        return result.house_of(w.agent) == w.house && instance.truth(w.agent).preference.prefers(w.agent, w.house);
    }

    bool operator()(const MisreportWitness& w) const {
        const AgentType& truth = instance.truth(w.agent);
        if (w.report == truth) {
            return false;
        }
        const AgentId honest = mechanism(instance.with_report(w.agent, truth)).house_of(w.agent);
        const AgentId gained = mechanism(instance.with_report(w.agent, w.report)).house_of(w.agent);
        return honest == w.truthful_house && gained == w.gained_house && truth.preference.prefers(gained, honest);
    }

    bool operator()(const CoalitionWitness& w) const {
        const TruthView view(instance);
        if (w.coalition.empty() || w.coalition.size() != w.houses.size() ||
            !admits(family(), view.graph, w.coalition)) {
            return false;
        }
        auto endowments = w.coalition;
        auto houses = w.houses;
        std::sort(endowments.begin(), endowments.end());
        std::sort(houses.begin(), houses.end());
        if (endowments != houses) {
            return false;
        }
        bool strict = false;
        for (std::size_t k = 0; k < w.coalition.size(); ++k) {
            const AgentId i = w.coalition[k];
            if (!std::binary_search(view.qualified.begin(), view.qualified.end(), i) ||
                view.pref(i).prefers(allocation.house_of(i), w.houses[k])) {
                return false;
            }
            strict = strict || view.pref(i).prefers(w.houses[k], allocation.house_of(i));
        }
        return strict;
    }

    bool operator()(const DominationWitness& w) const {
        const TruthView view(instance);
        std::vector<AgentId> changed;
        for (AgentId i = 1; i <= instance.size(); ++i) {
            const AgentId now = allocation.house_of(i);
            const AgentId alt = w.alternative.house_of(i);
            if (now == alt) {
                continue;
            }
            if (!std::binary_search(view.qualified.begin(), view.qualified.end(), i) || view.pref(i).prefers(now, alt)) {
                return false;
            }
            changed.push_back(i);
        }
        return !changed.empty() && changed == w.changed && admits(family(), view.graph, changed);
    }
};

nlohmann::ordered_json witness_json(const Witness& witness) {
    using J = nlohmann::ordered_json;
    return std::visit(
        [](const auto& w) -> J {
            using T = std::decay_t<decltype(w)>;
            J j;
            if constexpr (std::is_same_v<T, IrWitness>) {
                j["kind"] = "ir-shortfall";
                j["agent"] = w.agent;
                j["house"] = w.house;
                if (w.profile) {
                    J reports = J::object();
                    for (AgentId i = 1; i <= w.profile->size(); ++i) {
                        reports[std::to_string(i)] = w.profile->reported(i).neighbors;
                    }
                    j["reported_neighbors"] = std::move(reports);
                }
            } else if constexpr (std::is_same_v<T, MisreportWitness>) {
                j["kind"] = "misreport";
                j["agent"] = w.agent;
                j["report"] = J{{"pref", w.report.preference.ranking()}, {"neighbors", w.report.neighbors}};
                j["truthful_house"] = w.truthful_house;
                j["gained_house"] = w.gained_house;
            } else if constexpr (std::is_same_v<T, CoalitionWitness>) {
                j["kind"] = "coalition";
                j["coalition"] = w.coalition;
                j["houses"] = w.houses;
            } else {
                j["kind"] = "domination";
                j["alternative"] = w.alternative.houses();
                j["changed"] = w.changed;
            }
            return j;
        },
        witness);
}

} // namespace

bool replay_witness(const PropertyReport& report, const Mechanism& mechanism, const Instance& instance,
                    const Allocation& allocation) {
    if (!report.witness) {
        return false;
    }
    return std::visit(Replay{report, mechanism, instance, allocation}, *report.witness);
}

std::string report_to_json(const PropertyReport& report) {
    nlohmann::ordered_json j;
    j["property"] = property_name(report.property);
    j["holds"] = report.holds;
    j["work"] = report.work;
    if (!report.scope.empty()) {
        j["scope"] = report.scope;
    }
    j["witness"] = report.witness ? witness_json(*report.witness) : nullptr;
    return j.dump();
}

namespace {

// Exhaustive IC over a small market space. An agent's outcome under each of her possible
// reports depends on the network and the others' preferences but not on her own true
// preference, so one table of outcomes serves every true ranking she might hold. Counts are
// reported over the same isomorphism representatives that the other scans visit.
// Returns false when stopped at the first violation.
bool scan_ic_by_tables(const SmallMarketSpace& space, const Mechanism& mechanism, bool stop_at_first,
                       ScanReport& report) {
    const int n = space.agents();
    const int codes = space.codes();
    const std::uint64_t total = space.profile_count();
    std::vector<std::uint64_t> weight(static_cast<std::size_t>(n), 1);
    for (int a = n - 2; a >= 0; --a) {
        weight[static_cast<std::size_t>(a)] = weight[static_cast<std::size_t>(a + 1)] * static_cast<std::uint64_t>(codes);
    }
    auto encode = [&](const std::vector<int>& profile) {
        std::uint64_t index = 0;
        for (int a = 0; a < n; ++a) {
            index += weight[static_cast<std::size_t>(a)] * static_cast<std::uint64_t>(profile[static_cast<std::size_t>(a)]);
        }
        return index;
    };

    std::vector<int> profile;
    std::vector<AgentId> house; // house[s * codes + r]
    for (const auto& network : space.networks()) {
        std::vector<char> violated(total, 0);
        std::map<std::uint64_t, MisreportWitness> witnesses; // representatives only
        bool found = false;

        for (AgentId i = 1; i <= n && !(found && stop_at_first); ++i) {
            const auto subsets = subsets_by_size(network.neighbors[at(i)]);
            std::vector<Preference> rankings;
            for (int c = 0; c < codes; ++c) {
                rankings.emplace_back(space.ranking(i, c));
            }
            house.assign(subsets.size() * static_cast<std::size_t>(codes), 0);
            for (std::uint64_t index = 0; index < total && !(found && stop_at_first); ++index) {
                space.decode(index, profile);
                if (profile[at(i)] != 0) {
                    continue;
                }
                const Instance base = validate_instance(space.raw_instance(network, profile));
                for (std::size_t s = 0; s < subsets.size(); ++s) {
                    for (int r = 0; r < codes; ++r) {
                        const Instance reported = base.with_report(i, AgentType{rankings[static_cast<std::size_t>(r)], subsets[s]});
                        house[s * static_cast<std::size_t>(codes) + static_cast<std::size_t>(r)] =
                            mechanism(reported).house_of(i);
                    }
                }
                for (int t = 0; t < codes; ++t) {
                    const Preference& truth = rankings[static_cast<std::size_t>(t)];
                    const AgentId honest = house[static_cast<std::size_t>(t)];
                    std::optional<MisreportWitness> gain;
                    for (std::size_t s = 0; s < subsets.size() && !gain; ++s) {
                        for (int r = 0; r < codes; ++r) {
                            const AgentId h = house[s * static_cast<std::size_t>(codes) + static_cast<std::size_t>(r)];
                            if (truth.prefers(h, honest)) {
                                gain = MisreportWitness{i, AgentType{rankings[static_cast<std::size_t>(r)], subsets[s]}, honest, h};
                                break;
                            }
                        }
                    }
                    if (!gain) {
                        continue;
                    }
                    profile[at(i)] = t;
                    const std::uint64_t labeled = encode(profile);
                    violated[labeled] = 1;
                    if (space.representative(network, profile)) {
                        witnesses.try_emplace(labeled, *gain);
                        found = true;
                    }
                    profile[at(i)] = 0;
                }
            }
        }

        for (std::uint64_t index = 0; index < total; ++index) {
            space.decode(index, profile);
            if (!space.representative(network, profile)) {
                continue;
            }
            ++report.instances_checked;
            if (!violated[index]) {
                continue;
            }
            if (report.violations++ == 0) {
                report.first_witness = witnesses.at(index);
                report.first_instance = validate_instance(space.raw_instance(network, profile));
            }
        }
        if (found && stop_at_first) {
            return false;
        }
    }
    return true;
}

} // namespace

ScanReport exhaustive_scan(const ScanOptions& options) {
    ScanReport report;
    report.mechanism = std::string(mechanism_name(options.mechanism));
    report.property = std::string(property_name(options.property));
    report.n = options.n;
    const Mechanism mechanism = make_mechanism(options.mechanism, options.tie_rule);

    auto visit = [&](const Instance& instance) {
        ++report.instances_checked;
        const PropertyReport r = check_property(options.property, mechanism, instance, options.caps);
        if (!r.holds) {
            if (report.violations++ == 0) {
                report.first_witness = r.witness;
                report.first_instance = instance;
            }
            return !options.stop_at_first;
        }
        return true;
    };

    if (options.exhaustive) {
        if (options.n < 1 || options.n > 4) {
            throw Error(ErrorCode::CapExceeded, "exhaustive scans cover 1 to 4 agents");
        }
        if (options.property == Property::IC) {
            for (int k = 1; k <= options.n; ++k) {
                if (!scan_ic_by_tables(SmallMarketSpace(k), mechanism, options.stop_at_first, report)) {
                    break;
                }
            }
            return report;
        }
        for (int k = 1; k <= options.n; ++k) {
            bool stopped = false;
            enumerate_small_markets(k, [&](const Instance& instance) {
                stopped = !visit(instance);
                return !stopped;
            });
            if (stopped) {
                break;
            }
        }
        return report;
    }

    std::mt19937_64 seeds(options.seed);
    for (std::uint64_t s = 0; s < options.samples; ++s) {
        if (!visit(gen_random(options.n, options.edge_probability, seeds()))) {
            break;
        }
    }
    return report;
}

std::string scan_report_to_json(const ScanReport& report) {
    nlohmann::ordered_json j;
    j["mechanism"] = report.mechanism;
    j["property"] = report.property;
    j["n"] = report.n;
    j["instances_checked"] = report.instances_checked;
    j["violations"] = report.violations;
    if (report.first_witness) {
        j["first_witness"] = witness_json(*report.first_witness);
        j["first_witness"]["instance"] = nlohmann::ordered_json::parse(serialize_instance(*report.first_instance));
    } else {
        j["first_witness"] = nullptr;
    }
    return j.dump();
}

} // namespace netswap
