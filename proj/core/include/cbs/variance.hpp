#pragma once

#include "cbs/estimator.hpp"
#include "cbs/grouping.hpp"

namespace cbs {

/// Shot counts per measured quantity. A plan either carries the basis/A/B
/// stream structure (l_f, l_a, l_b with l_g empty) or a flat per-stream list
/// in l_g (generic allocations and per-group conventional plans).
struct MeasurementPlan {
    std::uint64_t l_f = 0;
    std::vector<std::uint64_t> l_a;  // shots for A_r, r = 2..R
    std::vector<std::uint64_t> l_b;  // shots for B_r, r = 2..R
    std::vector<std::uint64_t> l_g;  // flat per-stream shots

    /// Streams in canonical order: l_g if present, else f, A_2..A_R, B_2..B_R.
    std::vector<std::uint64_t> flat() const;
    std::uint64_t total() const;
};

/// L_lambda proportional to sqrt(v_lambda), rounded by largest remainder so
/// the total is exactly total_l; zero-variance streams receive zero shots.
MeasurementPlan optimal_allocation(std::span<const double> v, std::uint64_t total_l);

/// optimal_allocation over the streams (v_f, v_a..., v_b...), unpacked into
/// the structured plan fields.
MeasurementPlan cbs_allocation(double v_f, std::span<const double> v_a,
                               std::span<const double> v_b, std::uint64_t total_l);

/// sum_lambda v_lambda / L_lambda for the plan.
double allocation_variance(std::span<const double> v_true, std::span<const std::uint64_t> shots);
double allocation_variance(std::span<const double> v_true, const MeasurementPlan& plan);

/// (sum sqrt(v))^2: the L-independent constant under optimal allocation.
double optimal_cv(std::span<const double> v);

/// (sum sqrt(v_ref)) (sum v_true/sqrt(v_ref)): the constant realized on the
/// true state when shots are allocated from reference variances.
double reference_cv(std::span<const double> v_ref, std::span<const double> v_true);

/// Partial derivatives of the unnormalized estimator with respect to the
/// measured quantities, evaluated at the given (f, A, B) point.
struct GradientRecord {
    double df1 = 0.0;
    std::vector<double> df;  // d<O>/df_r,  r = 2..R at index r-2
    std::vector<double> da;  // d<O>/dA_r
    std::vector<double> db;  // d<O>/dB_r
};

GradientRecord cbs_gradients(const Observable& o, std::span<const basis_label> labels,
                             const InterferenceSet& intf);

/// Single-shot variance coefficients: v_f from the multinomial quadratic
/// form, v_{A_r} = (d<O>/dA_r)^2 A_r(1-A_r), v_{B_r} likewise.
struct CbsStreamVariances {
    double v_f = 0.0;
    std::vector<double> v_a;
    std::vector<double> v_b;

    std::vector<double> flat() const;
};

CbsStreamVariances cbs_stream_variances(const Observable& o,
                                        std::span<const basis_label> labels,
                                        const InterferenceSet& intf);

struct StreamVariance {
    std::string name;
    double v = 0.0;
    std::uint64_t shots = 0;
};

struct VarianceReport {
    std::string allocation_mode;
    double c_v = 0.0;
    double total_variance = 0.0;
    std::vector<StreamVariance> streams;
};

/// Variance of the estimator under the given plan:
///   v_f/L_f + sum_r (v_{A_r}/L_{A_r} + v_{B_r}/L_{B_r}).
VarianceReport cbs_variance(const Observable& o, const TruncationResult& trunc,
                            const InterferenceSet& intf, const MeasurementPlan& plan);

/// Stream variances of the surrogate state psi_w = sqrt(w)|z_1> +
/// sum_r sqrt((1-w)/(R-1))|z_r>, with transition elements taken at the true
/// labels.
CbsStreamVariances heuristic_variances(const Observable& o,
                                       std::span<const basis_label> labels, double w);

/// Plan allocated from the psi_w stream variances (default w = 0.75).
MeasurementPlan heuristic_plan(const Observable& o, std::span<const basis_label> labels,
                               double w, std::uint64_t total_l);

/// Var[O_g] = <O_g^2> - <O_g>^2 for one simultaneously measurable group.
double group_variance(std::span<const PauliTerm> group, const StateVector& psi);

enum class ConventionalMode { exact, haar };

/// Exact mode: shots from the true group variances, c_v = (sum sqrt(Var))^2.
/// Haar mode: shots from Var^Haar[O_g] = sum_k c_k^2, c_v realized on psi.
VarianceReport conventional_variance(const Observable& o, const GroupingResult& grouping,
                                     const StateVector& psi, ConventionalMode mode,
                                     std::uint64_t total_l);

/// ceil(c_v / target_sd^2); zero for a deterministic estimator.
std::uint64_t shots_to_target(double c_v, double target_sd);

/// Variance of sampling f(m,n) = <m|O|n>/(<m|psi><psi|n>) with probability
/// |<m|psi>|^2 |<n|psi>|^2 over the support of a real-amplitude state:
///   Tr_M[(O|_M)^2] - <O>^2.
double importance_sampling_variance(const Observable& o, const StateVector& psi);

}  // namespace cbs
