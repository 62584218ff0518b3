#include "cbs/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbs {

namespace {

constexpr double kFactorGuard = 1e-14;
constexpr cplx kHalfPlus{0.5, 0.5};   // (1+i)/2
constexpr cplx kHalfMinus{0.5, -0.5};  // (1-i)/2

void check_nonnegative(std::span<const double> v) {
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw Error(ErrorKind::domain, "stream variances must be finite and >= 0");
        }
    }
}

}  // namespace

std::vector<std::uint64_t> MeasurementPlan::flat() const {
    if (!l_g.empty()) return l_g;
    std::vector<std::uint64_t> out;
    out.reserve(1 + l_a.size() + l_b.size());
    out.push_back(l_f);
    out.insert(out.end(), l_a.begin(), l_a.end());
    out.insert(out.end(), l_b.begin(), l_b.end());
    return out;
}

std::uint64_t MeasurementPlan::total() const {
    const auto shots = flat();
    return std::accumulate(shots.begin(), shots.end(), std::uint64_t{0});
}

MeasurementPlan optimal_allocation(std::span<const double> v, std::uint64_t total_l) {
    check_nonnegative(v);
    double sum_sqrt = 0.0;
    std::size_t nonzero = 0;
    for (double x : v) {
        if (x > 0.0) {
            sum_sqrt += std::sqrt(x);
            ++nonzero;
        }
    }
    if (nonzero == 0) {
        throw Error(ErrorKind::degenerate_variance, "all stream variances are zero");
    }
    if (total_l < nonzero) {
        throw Error(ErrorKind::domain, "budget smaller than the number of active streams");
    }

    std::vector<std::uint64_t> shots(v.size(), 0);
    std::vector<std::pair<double, std::size_t>> fractions;
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= 0.0) continue;
        const double share = static_cast<double>(total_l) * std::sqrt(v[i]) / sum_sqrt;
        const double floored = std::floor(share);
        shots[i] = static_cast<std::uint64_t>(floored);
        assigned += shots[i];
        fractions.emplace_back(share - floored, i);
    }
    std::sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t k = 0; assigned < total_l; ++k) {
        ++shots[fractions[k % fractions.size()].second];
        ++assigned;
    }

    MeasurementPlan plan;
    plan.l_g = std::move(shots);
    return plan;
}

MeasurementPlan cbs_allocation(double v_f, std::span<const double> v_a,
                               std::span<const double> v_b, std::uint64_t total_l) {
    if (v_a.size() != v_b.size()) {
        throw Error(ErrorKind::dimension, "A and B stream counts differ");
    }
    std::vector<double> v;
    v.reserve(1 + v_a.size() + v_b.size());
    v.push_back(v_f);
    v.insert(v.end(), v_a.begin(), v_a.end());
    v.insert(v.end(), v_b.begin(), v_b.end());

    const auto flat = optimal_allocation(v, total_l).l_g;
    MeasurementPlan plan;
    plan.l_f = flat[0];
    plan.l_a.assign(flat.begin() + 1, flat.begin() + 1 + v_a.size());
    plan.l_b.assign(flat.begin() + 1 + v_a.size(), flat.end());
    return plan;
}

double allocation_variance(std::span<const double> v_true,
                           std::span<const std::uint64_t> shots) {
    check_nonnegative(v_true);
    if (v_true.size() != shots.size()) {
        throw Error(ErrorKind::dimension, "variance and shot lists differ in length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < v_true.size(); ++i) {
        if (v_true[i] == 0.0) continue;
        if (shots[i] == 0) {
            throw Error(ErrorKind::infinite_variance,
                        "stream " + std::to_string(i) +
                            " has positive variance but zero shots");
        }
        total += v_true[i] / static_cast<double>(shots[i]);
    }
    return total;
}

double allocation_variance(std::span<const double> v_true, const MeasurementPlan& plan) {
    const auto shots = plan.flat();
    return allocation_variance(v_true, shots);
}

double optimal_cv(std::span<const double> v) {
    check_nonnegative(v);
    double sum_sqrt = 0.0;
    for (double x : v) sum_sqrt += std::sqrt(x);
    return sum_sqrt * sum_sqrt;
}

double reference_cv(std::span<const double> v_ref, std::span<const double> v_true) {
    check_nonnegative(v_ref);
    check_nonnegative(v_true);
    if (v_ref.size() != v_true.size()) {
        throw Error(ErrorKind::dimension, "reference and true variance lists differ");
    }
    double sum_sqrt_ref = 0.0;
    double sum_ratio = 0.0;
    for (std::size_t i = 0; i < v_ref.size(); ++i) {
        sum_sqrt_ref += std::sqrt(v_ref[i]);
        if (v_true[i] == 0.0) continue;
        if (v_ref[i] == 0.0) {
            throw Error(ErrorKind::infinite_variance,
                        "reference assigns no shots to stream " + std::to_string(i) +
                            " with positive true variance");
        }
        sum_ratio += v_true[i] / std::sqrt(v_ref[i]);
    }
    return sum_sqrt_ref * sum_ratio;
}

namespace {

/// Dense R x R matrix of transition elements <z_r|O|z_r'>.
std::vector<cplx> element_matrix(const Observable& o, std::span<const basis_label> labels) {
    const std::size_t R = labels.size();
    std::vector<cplx> el(R * R);
    for (std::size_t r = 0; r < R; ++r) {
        el[r * R + r] = observable_transition(labels[r], o, labels[r]);
        for (std::size_t rp = r + 1; rp < R; ++rp) {
            const cplx value = observable_transition(labels[r], o, labels[rp]);
            el[r * R + rp] = value;
            el[rp * R + r] = std::conj(value);
        }
    }
    return el;
}

cplx guarded_inverse(cplx g, std::size_t r) {
    if (std::abs(g) < kFactorGuard) {
        throw Error(ErrorKind::ill_conditioned,
                    "interference factor g_" + std::to_string(r) + " below guard threshold");
    }
    return 1.0 / g;
}

}  // namespace

GradientRecord cbs_gradients(const Observable& o, std::span<const basis_label> labels,
                             const InterferenceSet& intf) {
    const std::size_t R = intf.r();
    if (R == 0 || labels.size() != R) {
        throw Error(ErrorKind::dimension, "label list and interference set sizes differ");
    }
    const auto f = intf.weights();
    const auto el = element_matrix(o, labels);
    auto E = [&el, R](std::size_t r, std::size_t rp) { return el[(r - 1) * R + (rp - 1)]; };

    GradientRecord grad;
    grad.df1 = E(1, 1).real();
    grad.df.assign(R >= 2 ? R - 1 : 0, 0.0);
    grad.da.assign(R >= 2 ? R - 1 : 0, 0.0);
    grad.db.assign(R >= 2 ? R - 1 : 0, 0.0);
    if (R == 1) return grad;

    const double f1 = f[0];
    const auto g = intf.g();

    for (std::size_t r = 2; r <= R; ++r) {
        const double fr = f[r - 1];
        grad.df[r - 2] = E(r, r).real();

        const cplx e1r = E(1, r);
        if (e1r != cplx{0.0, 0.0}) {
            const cplx inv_g = guarded_inverse(g[r - 2], r);
            grad.df1 += 2.0 * (fr * inv_g * (1.0 + kHalfPlus * f1 * inv_g) * e1r).real();
            grad.df[r - 2] +=
                2.0 * (f1 * inv_g * (1.0 + kHalfPlus * fr * inv_g) * e1r).real();
        }

        // S_r = <z_1|O|z_r> + sum_{r' != r} (f_r'/conj(g_r')) <z_r'|O|z_r>
        cplx s = e1r;
        for (std::size_t rp = 2; rp <= R; ++rp) {
            if (rp == r) continue;
            const cplx erp = E(rp, r);
            if (erp == cplx{0.0, 0.0}) continue;
            s += f[rp - 1] * guarded_inverse(std::conj(g[rp - 2]), rp) * erp;
        }
        if (s != cplx{0.0, 0.0}) {
            const cplx inv_g = guarded_inverse(g[r - 2], r);
            const cplx core = f1 * fr * inv_g * inv_g * s;
            grad.da[r - 2] = -2.0 * core.real();
            grad.db[r - 2] = 2.0 * core.imag();
        }
    }

    for (std::size_t r = 2; r <= R; ++r) {
        for (std::size_t rp = r + 1; rp <= R; ++rp) {
            const cplx err = E(r, rp);
            if (err == cplx{0.0, 0.0}) continue;
            const cplx inv_gr_conj = guarded_inverse(std::conj(g[r - 2]), r);
            const cplx inv_grp = guarded_inverse(g[rp - 2], rp);
            const cplx pair = inv_gr_conj * inv_grp * err;
            grad.df1 += 2.0 * (f[r - 1] * f[rp - 1] * pair *
                               (1.0 + kHalfPlus * f1 * inv_grp + kHalfMinus * f1 * inv_gr_conj))
                                  .real();
            grad.df[r - 2] +=
                2.0 * (f1 * f[rp - 1] * pair * (1.0 + kHalfMinus * f[r - 1] * inv_gr_conj))
                          .real();
            grad.df[rp - 2] +=
                2.0 * (f1 * f[r - 1] * pair * (1.0 + kHalfPlus * f[rp - 1] * inv_grp)).real();
        }
    }
    return grad;
}

std::vector<double> CbsStreamVariances::flat() const {
    std::vector<double> out;
    out.reserve(1 + v_a.size() + v_b.size());
    out.push_back(v_f);
    out.insert(out.end(), v_a.begin(), v_a.end());
    out.insert(out.end(), v_b.begin(), v_b.end());
    return out;
}

CbsStreamVariances cbs_stream_variances(const Observable& o,
                                        std::span<const basis_label> labels,
                                        const InterferenceSet& intf) {
    const GradientRecord grad = cbs_gradients(o, labels, intf);
    const auto f = intf.weights();
    const std::size_t R = f.size();

    double quad = 0.0;
    double mean = 0.0;
    for (std::size_t r = 1; r <= R; ++r) {
        const double d = r == 1 ? grad.df1 : grad.df[r - 2];
        quad += d * d * f[r - 1];
        mean += d * f[r - 1];
    }
    CbsStreamVariances v;
    v.v_f = std::max(0.0, quad - mean * mean);
    v.v_a.resize(R >= 2 ? R - 1 : 0);
    v.v_b.resize(R >= 2 ? R - 1 : 0);
    for (std::size_t r = 2; r <= R; ++r) {
        const auto [a, b] = intf.ab(r);
        v.v_a[r - 2] = grad.da[r - 2] * grad.da[r - 2] * std::max(0.0, a * (1.0 - a));
        v.v_b[r - 2] = grad.db[r - 2] * grad.db[r - 2] * std::max(0.0, b * (1.0 - b));
    }
    return v;
}

VarianceReport cbs_variance(const Observable& o, const TruncationResult& trunc,
                            const InterferenceSet& intf, const MeasurementPlan& plan) {
    const std::size_t R = trunc.r();
    if (intf.r() != R) {
        throw Error(ErrorKind::dimension, "truncation and interference set sizes differ");
    }
    const std::size_t pairs = R >= 2 ? R - 1 : 0;
    if (!plan.l_g.empty() || plan.l_a.size() != pairs || plan.l_b.size() != pairs) {
        throw Error(ErrorKind::dimension, "plan streams do not match the truncation");
    }

    const CbsStreamVariances v = cbs_stream_variances(o, trunc.labels, intf);
    const auto v_flat = v.flat();

    VarianceReport report;
    report.allocation_mode = "exact";
    report.c_v = optimal_cv(v_flat);
    report.total_variance = allocation_variance(v_flat, plan);
    report.streams.push_back({"f", v.v_f, plan.l_f});
    for (std::size_t r = 2; r <= R; ++r) {
        report.streams.push_back({"A_" + std::to_string(r), v.v_a[r - 2], plan.l_a[r - 2]});
    }
    for (std::size_t r = 2; r <= R; ++r) {
        report.streams.push_back({"B_" + std::to_string(r), v.v_b[r - 2], plan.l_b[r - 2]});
    }
    return report;
}

CbsStreamVariances heuristic_variances(const Observable& o,
                                       std::span<const basis_label> labels, double w) {
    if (!(w > 0.0) || !(w < 1.0)) {
        throw Error(ErrorKind::domain, "heuristic weight must lie in (0, 1)");
    }
    const std::size_t R = labels.size();
    if (R < 2) {
        throw Error(ErrorKind::domain, "heuristic plan needs at least two basis states");
    }
    const double tail = (1.0 - w) / static_cast<double>(R - 1);
    std::vector<double> weights(R, tail);
    weights[0] = w;
    std::vector<cplx> g(R - 1, cplx{std::sqrt(w) * std::sqrt(tail), 0.0});
    const InterferenceSet surrogate(std::move(weights), std::move(g));
    return cbs_stream_variances(o, labels, surrogate);
}

MeasurementPlan heuristic_plan(const Observable& o, std::span<const basis_label> labels,
                               double w, std::uint64_t total_l) {
    const CbsStreamVariances v = heuristic_variances(o, labels, w);
    return cbs_allocation(v.v_f, v.v_a, v.v_b, total_l);
}

double group_variance(std::span<const PauliTerm> group, const StateVector& psi) {
    if (group.empty()) return 0.0;
    for (std::size_t a = 0; a < group.size(); ++a) {
        if (group[a].string.n_qubits != psi.n_qubits()) {
            throw Error(ErrorKind::dimension, "group and state qubit counts differ");
        }
        for (std::size_t b = a + 1; b < group.size(); ++b) {
            if (!generally_commutes(group[a].string, group[b].string)) {
                throw Error(ErrorKind::contract_violation,
                            "group members " + std::to_string(a) + " and " +
                                std::to_string(b) + " do not commute");
            }
        }
    }
    Observable og(psi.n_qubits(), std::vector<PauliTerm>(group.begin(), group.end()));
    std::vector<cplx> phi(psi.dim(), cplx{0.0, 0.0});
    apply_observable(og, psi.amplitudes(), phi);
    double second = 0.0;
    cplx first{0.0, 0.0};
    for (std::size_t n = 0; n < phi.size(); ++n) {
        second += std::norm(phi[n]);
        first += std::conj(psi.amp(n)) * phi[n];
    }
    return std::max(0.0, second - first.real() * first.real());
}

VarianceReport conventional_variance(const Observable& o, const GroupingResult& grouping,
                                     const StateVector& psi, ConventionalMode mode,
                                     std::uint64_t total_l) {
    std::vector<std::string> diagnostics;
    if (!verify_grouping(o, grouping, &diagnostics)) {
        throw Error(ErrorKind::contract_violation,
                    "invalid grouping: " + (diagnostics.empty() ? "unknown" : diagnostics[0]));
    }
    const bool has_content =
        std::any_of(o.terms().begin(), o.terms().end(),
                    [](const PauliTerm& t) { return !t.string.is_identity(); });
    if (grouping.groups.empty()) {
        if (has_content) {
            throw Error(ErrorKind::domain, "empty grouping for a non-trivial observable");
        }
        return VarianceReport{mode == ConventionalMode::exact ? "exact" : "haar", 0.0, 0.0, {}};
    }

    const std::size_t n_groups = grouping.groups.size();
    std::vector<double> v_true(n_groups, 0.0);
    std::vector<double> v_ref(n_groups, 0.0);
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
        std::vector<PauliTerm> members;
        members.reserve(grouping.groups[gi].size());
        for (std::size_t idx : grouping.groups[gi]) {
            members.push_back(o.terms()[idx]);
            v_ref[gi] += o.terms()[idx].coeff * o.terms()[idx].coeff;
        }
        v_true[gi] = group_variance(members, psi);
    }

    VarianceReport report;
    report.allocation_mode = mode == ConventionalMode::exact ? "exact" : "haar";

    const auto& alloc_basis = mode == ConventionalMode::exact ? v_true : v_ref;
    const bool any_alloc = std::any_of(alloc_basis.begin(), alloc_basis.end(),
                                       [](double x) { return x > 0.0; });
    MeasurementPlan plan;
    if (any_alloc && total_l > 0) {
        plan = optimal_allocation(alloc_basis, total_l);
    } else {
        plan.l_g.assign(n_groups, 0);
        const bool any_true = std::any_of(v_true.begin(), v_true.end(),
                                          [](double x) { return x > 0.0; });
        if (any_true) {
            throw Error(ErrorKind::infinite_variance,
                        "no shots available for streams with positive variance");
        }
    }

    report.c_v = mode == ConventionalMode::exact ? optimal_cv(v_true)
                                                 : reference_cv(v_ref, v_true);
    report.total_variance = allocation_variance(v_true, plan.l_g);
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
        report.streams.push_back(
            {"g" + std::to_string(gi), v_true[gi], plan.l_g[gi]});
    }
    return report;
}

std::uint64_t shots_to_target(double c_v, double target_sd) {
    if (!(c_v >= 0.0) || !std::isfinite(c_v)) {
        throw Error(ErrorKind::domain, "c_v must be finite and >= 0");
    }
    if (!(target_sd > 0.0)) {
        throw Error(ErrorKind::domain, "target standard deviation must be positive");
    }
    if (c_v == 0.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(c_v / (target_sd * target_sd)));
}

double importance_sampling_variance(const Observable& o, const StateVector& psi) {
    if (o.n_qubits() != psi.n_qubits()) {
        throw Error(ErrorKind::dimension, "observable and state qubit counts differ");
    }
    for (std::size_t n = 0; n < psi.dim(); ++n) {
        if (std::abs(psi.amp(n).imag()) > 1e-10) {
            throw Error(ErrorKind::domain,
                        "importance-sampling variance requires a real-amplitude state");
        }
    }
    std::vector<basis_label> support;
    for (std::size_t n = 0; n < psi.dim(); ++n) {
        if (std::norm(psi.amp(n)) > 0.0) support.push_back(n);
    }
    double trace = 0.0;
    for (basis_label m : support) {
        for (basis_label n : support) {
            trace += std::norm(observable_transition(m, o, n));
        }
    }
    const double mean = expectation(o, psi);
    return trace - mean * mean;
}

}  // namespace cbs
