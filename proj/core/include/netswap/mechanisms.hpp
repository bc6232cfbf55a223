#pragma once

#include <optional>
#include <string_view>

#include "netswap/model.hpp"
#include "netswap/trace.hpp"

namespace netswap {

enum class MechanismKind { TTC, SWN, LS, CTC };

std::string_view mechanism_name(MechanismKind kind);
std::optional<MechanismKind> parse_mechanism(std::string_view name);

// Every mechanism pins unqualified agents to their endowments and looks only at the
// reported profile of qualified agents.

// Shapley-Scarf top trading cycles over the qualified agents, ignoring the network.
Allocation run_ttc(const Instance& instance, Trace* trace = nullptr);

// Swap With Neighbors: each remaining agent points at her favorite among herself and her
// remaining reported neighbors; all cycles trade each round.
Allocation run_swn(const Instance& instance, Trace* trace = nullptr);

// Leave and Share: stack-driven cycle detection in distance order; after every round the
// surviving neighbors of the departed agents become pairwise neighbors.
Allocation run_ls(const Instance& instance, const TieRule& tie_rule = {}, Trace* trace = nullptr);

// Connected Trading Cycles. See connected_cycles.hpp for the subroutines.
// Throws InvalidArgument for markets larger than 64 agents.
Allocation run_ctc(const Instance& instance, const TieRule& tie_rule = {}, Trace* trace = nullptr);

Allocation run_mechanism(MechanismKind kind, const Instance& instance, const TieRule& tie_rule = {},
                         Trace* trace = nullptr);

} // namespace netswap
