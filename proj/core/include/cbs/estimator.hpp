#pragma once

#include <map>

#include "cbs/state.hpp"

namespace cbs {

/// Dominant basis states z_1..z_R with weights in strictly descending order
/// (ties broken by ascending label).
struct TruncationResult {
    std::vector<basis_label> labels;
    std::vector<double> weights;
    double norm_factor = 1.0;  // 1/sqrt(sum of weights)
    double infidelity = 0.0;   // 1 - sum of weights

    std::size_t r() const { return labels.size(); }
};

/// Smallest R whose retained weight reaches 1 - epsilon.
TruncationResult truncate(const std::map<basis_label, double>& probs, double epsilon);

/// Interference factors g_r (r = 2..R) anchored at z_1, plus the
/// reconstructed pair factors:
///   G(r, r)  = f_r
///   G(1, r)  = g_r,  G(r, 1) = conj(g_r)
///   G(r, r') = conj(g_r) g_{r'} / f_1        (r, r' >= 2, r != r')
/// Indices are 1-based to match the z_r numbering.
class InterferenceSet {
  public:
    InterferenceSet() = default;
    InterferenceSet(std::vector<double> weights, std::vector<cplx> g);

    std::size_t r() const { return weights_.size(); }
    std::span<const cplx> g() const { return g_; }
    std::span<const double> weights() const { return weights_; }
    cplx G(std::size_t r, std::size_t rp) const;

    /// Inverts g_r back to the circuit outcome probabilities (A_r, B_r).
    std::pair<double, double> ab(std::size_t r) const;

  private:
    std::vector<double> weights_;
    std::vector<cplx> g_;  // g_[r-2] holds g_r
};

/// Builds g_r = A_r + iB_r - (1+i)(f_1+f_r)/2 from analytic probabilities.
InterferenceSet interference_set(const StateVector& psi, const TruncationResult& trunc);

/// Truncated estimator
///   sum_{r,r'} f_r f_{r'} <z_r|O|z_{r'}> / G(r, r'),
/// scaled by norm_factor^2 when normalize is true and left unscaled otherwise.
double cbs_expectation(const Observable& o, const TruncationResult& trunc,
                       const InterferenceSet& intf, bool normalize = true);

/// 2 ||O||_inf sqrt(infidelity), an upper bound on |<O>_psi - <O>_psiR|.
double truncation_bound(const Observable& o, double infidelity);

struct FilteredProbabilities {
    std::map<basis_label, double> probs;
    double rejected_mass = 0.0;
};

/// Drops labels whose popcount differs from particle_number and renormalizes.
FilteredProbabilities symmetry_filter(const std::map<basis_label, double>& probs,
                                      int particle_number);

}  // namespace cbs
