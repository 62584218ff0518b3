#pragma once

#include <map>
#include <utility>

#include "cbs/pauli.hpp"

namespace cbs {

/// Dense normalized state over 2^N computational basis states.
/// The global phase is fixed at construction so that the largest-modulus
/// amplitude is real and non-negative (ties broken by lowest basis label);
/// for real Hamiltonians this makes every ground-state amplitude real.
class StateVector {
  public:
    /// Normalizes the given amplitudes (throws on a zero vector or a size
    /// that is not 2^n_qubits) and applies the phase convention.
    StateVector(int n_qubits, std::vector<cplx> amplitudes);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const cplx> amplitudes() const { return amps_; }
    cplx amp(basis_label n) const { return amps_[n]; }

  private:
    int n_qubits_;
    std::vector<cplx> amps_;
};

struct GroundStateResult {
    double energy = 0.0;
    StateVector state;
    double residual = 0.0;
    bool degenerate = false;
};

/// <psi|O|psi>, matrix-free; the imaginary residue must be <= 1e-10.
double expectation(const Observable& o, const StateVector& psi);

/// Lowest eigenpair: dense diagonalization for N <= 10, restarted Lanczos
/// with full reorthogonalization otherwise. The degenerate flag is set when
/// the gap to the next eigenvalue is below 1e-10.
GroundStateResult ground_state(const Observable& h, double tol = 1e-9);

/// Iterative path of ground_state, exposed for direct testing at small N.
GroundStateResult lanczos_ground_state(const Observable& h, double tol = 1e-9);

/// |<n|psi>|^2 for every label with probability above the prune threshold.
std::map<basis_label, double> basis_probabilities(const StateVector& psi,
                                                  double prune = 1e-16);

/// Interference-circuit outcome probabilities for the pair (m, n):
///   A = |(<m| + <n|) psi|^2 / 2,   B = |(<m| + i<n|) psi|^2 / 2,
/// which satisfy A + iB - (1+i)(f_m+f_n)/2 = <m|psi><psi|n>.
std::pair<double, double> ab_probabilities(const StateVector& psi, basis_label m,
                                           basis_label n);

/// Binary dump: 4-byte little-endian qubit count, then 2^N little-endian
/// (re, im) double pairs.
void save_state(const std::string& path, const StateVector& psi);
StateVector load_state(const std::string& path);

}  // namespace cbs
