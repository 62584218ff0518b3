// Command-line front end: loads a Hamiltonian fixture, runs one analysis
// step, and writes a JSON or CSV report.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cbs/sampling.hpp"
#include "cbs/serialize.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string hamiltonian;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--hamiltonian", opts.hamiltonian, "Hamiltonian JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output file (default: stdout)");
    sub->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
}

void write_report(const CommonOpts& opts, const std::string& text) {
    if (opts.out.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(opts.out, std::ios::binary);
    if (!out) throw cbs::Error(cbs::ErrorKind::io, "cannot open '" + opts.out + "'");
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

std::string dump(const json& j) { return j.dump(1); }

bool parse_normalize(const std::string& value) {
    if (value == "on") return true;
    if (value == "off") return false;
    throw cbs::Error(cbs::ErrorKind::parse, "--normalize expects 'on' or 'off'");
}

/// Ground-state basis distribution, optionally post-selected on particle number.
std::map<cbs::basis_label, double> state_probabilities(const cbs::StateVector& psi,
                                                       std::optional<int> particle) {
    auto probs = cbs::basis_probabilities(psi);
    if (particle) probs = cbs::symmetry_filter(probs, *particle).probs;
    return probs;
}

struct TruncationRow {
    cbs::TruncationResult trunc;
    double e_exact = 0.0;
    double e_truncated = 0.0;
    double bound = 0.0;
};

TruncationRow truncation_row(const cbs::Observable& o, const cbs::GroundStateResult& gs,
                             double epsilon, std::optional<int> particle, bool normalize) {
    TruncationRow row;
    row.e_exact = gs.energy;
    row.trunc = cbs::truncate(state_probabilities(gs.state, particle), epsilon);
    const cbs::InterferenceSet intf = cbs::interference_set(gs.state, row.trunc);
    row.e_truncated = cbs::cbs_expectation(o, row.trunc, intf, normalize);
    row.bound = cbs::truncation_bound(o, row.trunc.infidelity);
    return row;
}

int cmd_ground_state(const CommonOpts& opts) {
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroundStateResult gs = cbs::ground_state(o);
    if (opts.format == "csv") {
        std::ostringstream csv;
        csv << "energy,residual,degenerate\n"
            << json(gs.energy).dump() << ',' << json(gs.residual).dump() << ','
            << (gs.degenerate ? 1 : 0) << '\n';
        write_report(opts, csv.str());
    } else {
        json j;
        j["energy"] = gs.energy;
        j["residual"] = gs.residual;
        j["degenerate"] = gs.degenerate;
        j["n_qubits"] = o.n_qubits();
        j["terms"] = o.size();
        write_report(opts, dump(j));
    }
    return 0;
}

int cmd_truncate(const CommonOpts& opts, double epsilon, std::optional<int> particle) {
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroundStateResult gs = cbs::ground_state(o);
    const TruncationRow row = truncation_row(o, gs, epsilon, particle, true);
    const double delta_e = row.e_truncated - row.e_exact;
    if (opts.format == "csv") {
        std::ostringstream csv;
        csv << "r,epsilon,infidelity,delta_e,bound,e_exact,e_truncated\n"
            << row.trunc.r() << ',' << json(epsilon).dump() << ','
            << json(row.trunc.infidelity).dump() << ',' << json(delta_e).dump() << ','
            << json(row.bound).dump() << ',' << json(row.e_exact).dump() << ','
            << json(row.e_truncated).dump() << '\n';
        write_report(opts, csv.str());
    } else {
        json j = json::parse(cbs::truncation_to_json(row.trunc));
        j["r"] = row.trunc.r();
        j["epsilon"] = epsilon;
        j["delta_e"] = delta_e;
        j["bound"] = row.bound;
        j["e_exact"] = row.e_exact;
        j["e_truncated"] = row.e_truncated;
        write_report(opts, dump(j));
    }
    return 0;
}

int cmd_estimate(const CommonOpts& opts, double epsilon, std::optional<int> particle,
                 const std::string& normalize) {
    const bool norm = parse_normalize(normalize);
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroundStateResult gs = cbs::ground_state(o);
    const TruncationRow row = truncation_row(o, gs, epsilon, particle, norm);
    const double delta_e = row.e_truncated - row.e_exact;
    if (opts.format == "csv") {
        std::ostringstream csv;
        csv << "r,epsilon,normalized,e_exact,e_truncated,delta_e,infidelity,bound\n"
            << row.trunc.r() << ',' << json(epsilon).dump() << ',' << (norm ? 1 : 0) << ','
            << json(row.e_exact).dump() << ',' << json(row.e_truncated).dump() << ','
            << json(delta_e).dump() << ',' << json(row.trunc.infidelity).dump() << ','
            << json(row.bound).dump() << '\n';
        write_report(opts, csv.str());
    } else {
        json j;
        j["r"] = row.trunc.r();
        j["epsilon"] = epsilon;
        j["normalized"] = norm;
        j["e_exact"] = row.e_exact;
        j["e_truncated"] = row.e_truncated;
        j["delta_e"] = delta_e;
        j["infidelity"] = row.trunc.infidelity;
        j["bound"] = row.bound;
        write_report(opts, dump(j));
    }
    return 0;
}

int cmd_group(const CommonOpts& opts, const std::string& relation) {
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroupingResult g = cbs::sorted_insertion(o, cbs::parse_relation(relation));
    if (opts.format == "csv") {
        std::ostringstream csv;
        csv << "group,terms\n";
        for (std::size_t gi = 0; gi < g.groups.size(); ++gi) {
            csv << gi << ',';
            for (std::size_t k = 0; k < g.groups[gi].size(); ++k) {
                if (k > 0) csv << ';';
                csv << g.groups[gi][k];
            }
            csv << '\n';
        }
        write_report(opts, csv.str());
    } else {
        write_report(opts, cbs::grouping_to_json(g));
    }
    return 0;
}

cbs::VarianceReport cbs_variance_report(const cbs::Observable& o,
                                        const cbs::GroundStateResult& gs, double epsilon,
                                        std::optional<int> particle, const std::string& mode,
                                        double w, std::uint64_t shots) {
    const cbs::TruncationResult trunc =
        cbs::truncate(state_probabilities(gs.state, particle), epsilon);
    const cbs::InterferenceSet intf = cbs::interference_set(gs.state, trunc);
    const cbs::CbsStreamVariances v_true = cbs::cbs_stream_variances(o, trunc.labels, intf);
    const auto flat_true = v_true.flat();

    cbs::MeasurementPlan plan;
    cbs::VarianceReport report;
    if (cbs::optimal_cv(flat_true) == 0.0) {
        plan.l_a.assign(v_true.v_a.size(), 0);
        plan.l_b.assign(v_true.v_b.size(), 0);
        report = cbs::cbs_variance(o, trunc, intf, plan);
        report.allocation_mode = mode;
        return report;
    }
    if (mode == "heuristic") {
        const cbs::CbsStreamVariances v_heur =
            cbs::heuristic_variances(o, trunc.labels, w);
        plan = cbs::cbs_allocation(v_heur.v_f, v_heur.v_a, v_heur.v_b, shots);
        report = cbs::cbs_variance(o, trunc, intf, plan);
        report.allocation_mode = "heuristic-w";
        report.c_v = cbs::reference_cv(v_heur.flat(), flat_true);
    } else {
        plan = cbs::cbs_allocation(v_true.v_f, v_true.v_a, v_true.v_b, shots);
        report = cbs::cbs_variance(o, trunc, intf, plan);
    }
    return report;
}

int cmd_variance(const CommonOpts& opts, double epsilon, std::optional<int> particle,
                 const std::string& mode, double w, std::uint64_t shots,
                 const std::string& relation) {
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroundStateResult gs = cbs::ground_state(o);
    cbs::VarianceReport report;
    if (relation.empty()) {
        if (mode == "haar") {
            throw cbs::Error(cbs::ErrorKind::domain,
                             "haar allocation applies to grouped estimation; pass --relation");
        }
        report = cbs_variance_report(o, gs, epsilon, particle, mode, w, shots);
    } else {
        if (mode == "heuristic") {
            throw cbs::Error(cbs::ErrorKind::domain,
                             "heuristic allocation applies to the basis-sampling method");
        }
        const cbs::GroupingResult g = cbs::sorted_insertion(o, cbs::parse_relation(relation));
        const cbs::ConventionalMode cmode = mode == "haar" ? cbs::ConventionalMode::haar
                                                           : cbs::ConventionalMode::exact;
        report = cbs::conventional_variance(o, g, gs.state, cmode, shots);
    }
    write_report(opts, opts.format == "csv" ? cbs::variance_report_to_csv(report)
                                            : cbs::variance_report_to_json(report));
    return 0;
}

int cmd_shots(const CommonOpts& opts, double epsilon, std::optional<int> particle,
              double w, double target_sd) {
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroundStateResult gs = cbs::ground_state(o);
    const cbs::TruncationResult trunc =
        cbs::truncate(state_probabilities(gs.state, particle), epsilon);
    const cbs::InterferenceSet intf = cbs::interference_set(gs.state, trunc);
    const cbs::CbsStreamVariances v_true = cbs::cbs_stream_variances(o, trunc.labels, intf);
    const auto flat_true = v_true.flat();

    struct Row {
        std::string method;
        std::string mode;
        double c_v;
        std::uint64_t shots;
    };
    std::vector<Row> rows;
    auto push = [&](const std::string& method, const std::string& mode, double c_v) {
        rows.push_back({method, mode, c_v, cbs::shots_to_target(c_v, target_sd)});
    };

    push("cbs", "exact", cbs::optimal_cv(flat_true));
    if (trunc.r() >= 2) {
        const cbs::CbsStreamVariances v_heur =
            cbs::heuristic_variances(o, trunc.labels, w);
        push("cbs", "heuristic", cbs::reference_cv(v_heur.flat(), flat_true));
    }
    for (const cbs::Relation relation :
         {cbs::Relation::none, cbs::Relation::qwc, cbs::Relation::gc}) {
        const cbs::GroupingResult g = cbs::sorted_insertion(o, relation);
        std::vector<double> v_grp(g.groups.size(), 0.0);
        std::vector<double> v_ref(g.groups.size(), 0.0);
        for (std::size_t gi = 0; gi < g.groups.size(); ++gi) {
            std::vector<cbs::PauliTerm> members;
            for (std::size_t idx : g.groups[gi]) {
                members.push_back(o.terms()[idx]);
                v_ref[gi] += o.terms()[idx].coeff * o.terms()[idx].coeff;
            }
            v_grp[gi] = cbs::group_variance(members, gs.state);
        }
        push(cbs::relation_name(relation), "exact", cbs::optimal_cv(v_grp));
        push(cbs::relation_name(relation), "haar", cbs::reference_cv(v_ref, v_grp));
    }

    if (opts.format == "csv") {
        std::ostringstream csv;
        csv << "method,mode,c_v,shots\n";
        for (const Row& row : rows) {
            csv << row.method << ',' << row.mode << ',' << json(row.c_v).dump() << ','
                << row.shots << '\n';
        }
        write_report(opts, csv.str());
    } else {
        json j;
        j["target_sd"] = target_sd;
        j["epsilon"] = epsilon;
        j["r"] = trunc.r();
        j["rows"] = json::array();
        for (const Row& row : rows) {
            j["rows"].push_back({{"method", row.method},
                                 {"mode", row.mode},
                                 {"c_v", row.c_v},
                                 {"shots", row.shots}});
        }
        write_report(opts, dump(j));
    }
    return 0;
}

int cmd_simulate(const CommonOpts& opts, const cbs::ExperimentConfig& cfg) {
    const cbs::Observable o = cbs::load_observable(opts.hamiltonian);
    const cbs::GroundStateResult gs = cbs::ground_state(o);
    if (cfg.outer_m_prime > 1) {
        const cbs::OuterSummary summary = cbs::run_procedure_3(o, gs.state, cfg);
        write_report(opts, opts.format == "csv" ? cbs::outer_summary_to_csv(summary)
                                                : cbs::outer_summary_to_json(summary));
    } else {
        const cbs::ExperimentResult result = cbs::run_procedure_2(o, gs.state, cfg);
        write_report(opts, opts.format == "csv" ? cbs::experiment_to_csv(result)
                                                : cbs::experiment_to_json(result));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"computational-basis-sampling estimation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    double epsilon = 1e-4;
    double w = 0.75;
    double target_sd = 1e-3;
    std::uint64_t shots = 1000000;
    std::string mode = "exact";
    std::string relation;
    std::string normalize = "on";
    std::optional<int> particle;
    cbs::ExperimentConfig cfg;

    auto* ground = app.add_subcommand("ground-state", "solve for the ground state");
    add_common(ground, opts);

    auto* truncate = app.add_subcommand("truncate", "dominant-state truncation report");
    add_common(truncate, opts);
    truncate->add_option("--epsilon", epsilon, "truncation threshold");
    truncate->add_option("--particle-number", particle, "post-select on this popcount");

    auto* estimate = app.add_subcommand("estimate", "truncated estimator value");
    add_common(estimate, opts);
    estimate->add_option("--epsilon", epsilon, "truncation threshold");
    estimate->add_option("--particle-number", particle, "post-select on this popcount");
    estimate->add_option("--normalize", normalize, "apply the normalization factor")
        ->check(CLI::IsMember({"on", "off"}));

    auto* variance = app.add_subcommand("variance", "stream variances and allocation");
    add_common(variance, opts);
    variance->add_option("--epsilon", epsilon, "truncation threshold");
    variance->add_option("--particle-number", particle, "post-select on this popcount");
    variance->add_option("--mode", mode, "allocation mode")
        ->check(CLI::IsMember({"exact", "heuristic", "haar"}));
    variance->add_option("--w", w, "heuristic anchor weight");
    variance->add_option("--shots", shots, "total measurement budget");
    variance->add_option("--relation", relation, "grouped estimation with this relation")
        ->check(CLI::IsMember({"none", "qwc", "gc"}));

    auto* shots_cmd = app.add_subcommand("shots", "shots to reach a target sd, per method");
    add_common(shots_cmd, opts);
    shots_cmd->add_option("--epsilon", epsilon, "truncation threshold");
    shots_cmd->add_option("--particle-number", particle, "post-select on this popcount");
    shots_cmd->add_option("--w", w, "heuristic anchor weight");
    shots_cmd->add_option("--target-sd", target_sd, "target standard deviation");

    auto* simulate = app.add_subcommand("simulate", "finite-shot sampling experiment");
    add_common(simulate, opts);
    simulate->add_option("--lf", cfg.l_f, "basis-sampling shots per replica");
    simulate->add_option("--epsilon", cfg.epsilon_freq, "cumulative-frequency threshold");
    simulate->add_option("--replicas", cfg.replicas_m, "replicas per experiment");
    simulate->add_option("--outer", cfg.outer_m_prime, "outer repetitions");
    simulate->add_option("--seed", cfg.base_seed, "base RNG seed");
    simulate->add_option("--w", cfg.w, "heuristic anchor weight");
    simulate->add_option("--mode", cfg.allocation_mode, "allocation mode")
        ->check(CLI::IsMember({"exact", "heuristic"}));
    simulate
        ->add_option("--normalize", normalize, "apply the sampled normalization factor")
        ->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--particle-number", particle, "post-select on this popcount");

    auto* group = app.add_subcommand("group", "sorted-insertion term grouping");
    add_common(group, opts);
    group->add_option("--relation", relation, "commutation relation")
        ->check(CLI::IsMember({"none", "qwc", "gc"}))
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ground->parsed()) return cmd_ground_state(opts);
        if (truncate->parsed()) return cmd_truncate(opts, epsilon, particle);
        if (estimate->parsed()) return cmd_estimate(opts, epsilon, particle, normalize);
        if (variance->parsed()) {
            return cmd_variance(opts, epsilon, particle, mode, w, shots, relation);
        }
        if (shots_cmd->parsed()) return cmd_shots(opts, epsilon, particle, w, target_sd);
        if (simulate->parsed()) {
            cfg.normalize = parse_normalize(normalize);
            cfg.particle_filter = particle;
            return cmd_simulate(opts, cfg);
        }
        if (group->parsed()) return cmd_group(opts, relation);
    } catch (const cbs::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
