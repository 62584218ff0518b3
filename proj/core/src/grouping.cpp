#include "cbs/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbs {

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::none: return "none";
        case Relation::qwc: return "qwc";
        case Relation::gc: return "gc";
    }
    return "unknown";
}

Relation parse_relation(std::string_view name) {
    if (name == "none") return Relation::none;
    if (name == "qwc") return Relation::qwc;
    if (name == "gc") return Relation::gc;
    throw Error(ErrorKind::parse, "unknown relation '" + std::string(name) + "'");
}

namespace {

bool commute(Relation relation, const PauliString& p, const PauliString& q) {
    return relation == Relation::qwc ? qubit_wise_commutes(p, q) : generally_commutes(p, q);
}

std::uint64_t gc_gate_cost(int n_qubits) {
    if (n_qubits < 2) return 0;
    return static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(n_qubits) * n_qubits / std::log2(n_qubits)));
}

}  // namespace

GroupingResult sorted_insertion(const Observable& o, Relation relation) {
    GroupingResult result;
    result.relation = relation;

    std::vector<std::size_t> order;
    order.reserve(o.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
        if (o.terms()[i].string.is_identity()) {
            result.identity_offset += o.terms()[i].coeff;
        } else {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&o](std::size_t a, std::size_t b) {
        return std::abs(o.terms()[a].coeff) > std::abs(o.terms()[b].coeff);
    });

    std::vector<bool> placed(o.size(), false);
    for (std::size_t seed_pos = 0; seed_pos < order.size(); ++seed_pos) {
        if (placed[order[seed_pos]]) continue;
        std::vector<std::size_t> group{order[seed_pos]};
        placed[order[seed_pos]] = true;
        if (relation != Relation::none) {
            for (std::size_t pos = seed_pos + 1; pos < order.size(); ++pos) {
                const std::size_t candidate = order[pos];
                if (placed[candidate]) continue;
                const bool fits = std::all_of(
                    group.begin(), group.end(), [&](std::size_t member) {
                        return commute(relation, o.terms()[member].string,
                                       o.terms()[candidate].string);
                    });
                if (fits) {
                    group.push_back(candidate);
                    placed[candidate] = true;
                }
            }
        }
        result.groups.push_back(std::move(group));
    }

    result.two_qubit_gate_cost.assign(result.groups.size(),
                                      relation == Relation::gc ? gc_gate_cost(o.n_qubits())
                                                               : 0);
    return result;
}

bool verify_grouping(const Observable& o, const GroupingResult& result,
                     std::vector<std::string>* diagnostics) {
    bool ok = true;
    auto report = [&](std::string message) {
        ok = false;
        if (diagnostics) diagnostics->push_back(std::move(message));
    };

    std::vector<int> seen(o.size(), 0);
    for (std::size_t gi = 0; gi < result.groups.size(); ++gi) {
        const auto& group = result.groups[gi];
        if (group.empty()) {
            report("group " + std::to_string(gi) + " is empty");
            continue;
        }
        for (std::size_t idx : group) {
            if (idx >= o.size()) {
                report("group " + std::to_string(gi) + " references invalid term " +
                       std::to_string(idx));
                continue;
            }
            if (o.terms()[idx].string.is_identity()) {
                report("group " + std::to_string(gi) + " contains the identity term " +
                       std::to_string(idx));
            }
            ++seen[idx];
        }
        if (result.relation != Relation::none) {
            for (std::size_t a = 0; a < group.size(); ++a) {
                for (std::size_t b = a + 1; b < group.size(); ++b) {
                    if (group[a] >= o.size() || group[b] >= o.size()) continue;
                    if (!commute(result.relation, o.terms()[group[a]].string,
                                 o.terms()[group[b]].string)) {
                        report("terms " + std::to_string(group[a]) + " and " +
                               std::to_string(group[b]) + " violate relation " +
                               relation_name(result.relation) + " in group " +
                               std::to_string(gi));
                    }
                }
            }
        } else if (group.size() != 1) {
            report("relation none requires singleton groups, group " + std::to_string(gi) +
                   " has " + std::to_string(group.size()));
        }
    }
    for (std::size_t i = 0; i < o.size(); ++i) {
        const bool identity = o.terms()[i].string.is_identity();
        if (identity && seen[i] != 0) {
            report("identity term " + std::to_string(i) + " must stay ungrouped");
        }
        if (!identity && seen[i] != 1) {
            report("term " + std::to_string(i) + " appears " + std::to_string(seen[i]) +
                   " times");
        }
    }
    return ok;
}

}  // namespace cbs
