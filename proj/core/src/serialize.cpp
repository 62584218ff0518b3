#include "cbs/serialize.hpp"

#include <sstream>

#include "json.hpp"

namespace cbs {

namespace {

using nlohmann::json;

// Shortest round-trip decimal form, identical across platforms.
std::string num(double x) { return json(x).dump(); }

}  // namespace

std::string truncation_to_json(const TruncationResult& t) {
    json j;
    j["labels"] = t.labels;
    j["weights"] = t.weights;
    j["infidelity"] = t.infidelity;
    return j.dump(1);
}

std::string grouping_to_json(const GroupingResult& g) {
    json j;
    j["relation"] = relation_name(g.relation);
    j["groups"] = g.groups;
    return j.dump(1);
}

std::string variance_report_to_json(const VarianceReport& r) {
    json j;
    j["mode"] = r.allocation_mode;
    j["c_v"] = r.c_v;
    j["total_variance"] = r.total_variance;
    j["streams"] = json::array();
    for (const StreamVariance& s : r.streams) {
        j["streams"].push_back({{"name", s.name}, {"v", s.v}, {"shots", s.shots}});
    }
    return j.dump(1);
}

std::string variance_report_to_csv(const VarianceReport& r) {
    std::ostringstream out;
    out << "name,v,shots\n";
    for (const StreamVariance& s : r.streams) {
        out << s.name << ',' << num(s.v) << ',' << s.shots << '\n';
    }
    return out.str();
}

std::string experiment_to_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "seed,r_tilde,energy,total_shots\n";
    for (const ReplicaResult& rep : r.replicas) {
        if (rep.failed) continue;
        out << rep.seed << ',' << rep.r_tilde << ',' << num(rep.energy) << ','
            << rep.total_shots << '\n';
    }
    return out.str();
}

std::string experiment_to_json(const ExperimentResult& r) {
    json j;
    j["mean"] = r.mean;
    j["sd"] = r.sd;
    j["mean_shots"] = r.mean_shots;
    j["sigma_one"] = r.sigma_one;
    j["failures"] = r.failures;
    j["replicas"] = json::array();
    for (const ReplicaResult& rep : r.replicas) {
        j["replicas"].push_back({{"seed", rep.seed},
                                 {"r_tilde", rep.r_tilde},
                                 {"energy", rep.energy},
                                 {"total_shots", rep.total_shots},
                                 {"failed", rep.failed}});
    }
    return j.dump(1);
}

std::string outer_summary_to_json(const OuterSummary& s) {
    json j;
    j["means"] = s.means;
    j["sigma_ones"] = s.sigma_ones;
    j["mean_energy"] = s.mean_energy;
    j["sd_energy"] = s.sd_energy;
    j["mean_sigma_one"] = s.mean_sigma_one;
    j["sd_sigma_one"] = s.sd_sigma_one;
    return j.dump(1);
}

std::string outer_summary_to_csv(const OuterSummary& s) {
    std::ostringstream out;
    out << "repeat,mean,sigma_one\n";
    for (std::size_t j = 0; j < s.means.size(); ++j) {
        out << j << ',' << num(s.means[j]) << ',' << num(s.sigma_ones[j]) << '\n';
    }
    return out.str();
}

}  // namespace cbs
