#pragma once

#include "cbs/pauli.hpp"

namespace cbs {

enum class Relation { none, qwc, gc };

const char* relation_name(Relation r);
Relation parse_relation(std::string_view name);

/// Partition of an Observable's non-identity term indices into groups whose
/// members pairwise satisfy the declared commutation relation. The identity
/// term (if any) is excluded; its coefficient is carried as a constant offset.
struct GroupingResult {
    Relation relation = Relation::none;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::uint64_t> two_qubit_gate_cost;  // per group
    double identity_offset = 0.0;
};

/// Greedy grouping: sort terms by |c| descending (ties by original index),
/// seed a group with the largest remaining term, grow it by scanning all
/// remaining terms in sorted order, then seed the next group; relation none
/// yields singleton groups.
GroupingResult sorted_insertion(const Observable& o, Relation relation);

/// Checks the partition and pairwise-commutation invariants; failures are
/// appended to diagnostics when provided.
bool verify_grouping(const Observable& o, const GroupingResult& result,
                     std::vector<std::string>* diagnostics = nullptr);

}  // namespace cbs
