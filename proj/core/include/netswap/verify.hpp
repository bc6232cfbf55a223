#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netswap/mechanisms.hpp"
#include "netswap/model.hpp"

namespace netswap {

// All checkers judge against the true profile (the reported one when none is attached):
// true preferences, the true network G(θ) and the agents qualified in it. Unqualified agents
// are pinned to their own houses and never take part in a deviation.

enum class Property { IR, IC, PO, Stability, StableCC, OptimalCC, StableWCC, OptimalWCC };

std::string_view property_name(Property property); // "ir", "ic", "po", "stability", "stable-cc", ...
std::optional<Property> parse_property(std::string_view name);
const std::vector<Property>& all_properties();

using Mechanism = std::function<Allocation(const Instance&)>;
Mechanism make_mechanism(MechanismKind kind, const TieRule& tie_rule = {});

// Agent `agent` ends below her endowment. `profile` is the report profile that produced it.
struct IrWitness {
    AgentId agent = 0;
    AgentId house = 0;
    std::optional<Instance> profile;
};

// Reporting `report` instead of the truth moves `agent` from `truthful_house` to the strictly
// better `gained_house`.
struct MisreportWitness {
    AgentId agent = 0;
    AgentType report;
    AgentId truthful_house = 0;
    AgentId gained_house = 0;
};

// `coalition` can trade its own endowments as `houses` (houses[k] goes to coalition[k]).
struct CoalitionWitness {
    std::vector<AgentId> coalition;
    std::vector<AgentId> houses;
};

// `alternative` weakly improves everyone and strictly improves `changed`.
struct DominationWitness {
    Allocation alternative;
    std::vector<AgentId> changed;
};

using Witness = std::variant<IrWitness, MisreportWitness, CoalitionWitness, DominationWitness>;

struct PropertyReport {
    Property property = Property::IR;
    bool holds = true;
    std::optional<Witness> witness;
    std::uint64_t work = 0;  // candidates enumerated
    std::string scope;       // what was enumerated, for properties with partial coverage
};

struct VerifyCaps {
    int max_n = 8;               // fixed-allocation checks (PO, stability and the cc/wcc notions)
    int max_ic_n = 6;            // IC: full permutations of n houses per agent
    int max_ir_enumeration_n = 4; // IR: enumerate other agents' neighbor reports up to this size
    bool enumerate_neighbors = true;
    // Enumerate only rankings that differ above the agent's own house. Sound because no
    // mechanism here looks below an agent's own house.
    bool prefix_misreports = false;
};

PropertyReport check_ir(const Mechanism& mechanism, const Instance& instance, const VerifyCaps& caps = {});
PropertyReport check_ic(const Mechanism& mechanism, const Instance& instance, const VerifyCaps& caps = {});

PropertyReport check_po(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps = {});
PropertyReport check_stability(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps = {});
PropertyReport check_stable_cc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps = {});
PropertyReport check_optimal_cc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps = {});
PropertyReport check_stable_wcc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps = {});
PropertyReport check_optimal_wcc(const Allocation& allocation, const Instance& instance, const VerifyCaps& caps = {});

// Allocation properties are checked on mechanism(truthful instance).
PropertyReport check_property(Property property, const Mechanism& mechanism, const Instance& instance,
                              const VerifyCaps& caps = {});
PropertyReport check_allocation_property(Property property, const Allocation& allocation, const Instance& instance,
                                         const VerifyCaps& caps = {});

// Every allocation of one market with the allocation properties each one satisfies, computed
// together. Agrees with the individual checkers; used where per-allocation checks are too slow.
class AllocationSurvey {
public:
    std::size_t size() const { return held_.size(); }
    // Allocations come in lexicographic order of their house vectors.
    Allocation allocation(std::size_t k) const;
    bool holds(std::size_t k, Property property) const;

private:
    friend AllocationSurvey survey_allocations(const Instance& instance);
    int n_ = 0;
    std::vector<AgentId> houses_; // size() * n_
    std::vector<std::uint16_t> held_;
};

// Covers IR and every property of fixed allocations. Throws CapExceeded beyond 6 agents.
AllocationSurvey survey_allocations(const Instance& instance);

// Every ordered pair joined in both directions. Singletons included; sorted member lists.
std::vector<std::vector<AgentId>> enumerate_complete_components(const ReportedGraph& graph);
// Node sets connected when edges are read in either direction, with at most one pair of members
// not joined in both directions. Singletons included.
std::vector<std::vector<AgentId>> enumerate_weakly_complete_components(const ReportedGraph& graph);
bool is_complete_component(const ReportedGraph& graph, std::span<const AgentId> agents);
bool is_weakly_complete_component(const ReportedGraph& graph, std::span<const AgentId> agents);

// Re-checks a violated report's witness from scratch. `allocation` is the allocation the
// report judged (ignored for IR and IC).
bool replay_witness(const PropertyReport& report, const Mechanism& mechanism, const Instance& instance,
                    const Allocation& allocation);

std::string report_to_json(const PropertyReport& report);

struct ScanOptions {
    MechanismKind mechanism = MechanismKind::CTC;
    Property property = Property::IC;
    int n = 4;
    bool exhaustive = true;     // all markets of 1..n agents, up to isomorphism
    std::uint64_t samples = 0;  // otherwise: this many random markets of exactly n agents
    std::uint64_t seed = 0;
    double edge_probability = 0.5;
    TieRule tie_rule;
    VerifyCaps caps{.prefix_misreports = true};
    bool stop_at_first = false;
};

struct ScanReport {
    std::string mechanism;
    std::string property;
    int n = 0;
    std::uint64_t instances_checked = 0;
    std::uint64_t violations = 0;
    std::optional<Witness> first_witness;
    std::optional<Instance> first_instance;
};

// Throws CapExceeded for exhaustive scans beyond 4 agents.
ScanReport exhaustive_scan(const ScanOptions& options);
std::string scan_report_to_json(const ScanReport& report);

} // namespace netswap
