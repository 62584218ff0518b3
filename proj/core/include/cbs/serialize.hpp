#pragma once

#include "cbs/estimator.hpp"
#include "cbs/grouping.hpp"
#include "cbs/sampling.hpp"
#include "cbs/variance.hpp"

namespace cbs {

/// {"labels":[...],"weights":[...],"infidelity":x}
std::string truncation_to_json(const TruncationResult& t);

/// {"relation":"qwc","groups":[[0,3],[1],[2,4]]}
std::string grouping_to_json(const GroupingResult& g);

/// {"mode":...,"c_v":...,"total_variance":...,"streams":[{"name","v","shots"},...]}
std::string variance_report_to_json(const VarianceReport& r);

/// One stream per row: name,v,shots
std::string variance_report_to_csv(const VarianceReport& r);

/// One replica per row: seed,r_tilde,energy,total_shots
std::string experiment_to_csv(const ExperimentResult& r);
std::string experiment_to_json(const ExperimentResult& r);
std::string outer_summary_to_json(const OuterSummary& s);
std::string outer_summary_to_csv(const OuterSummary& s);

}  // namespace cbs
