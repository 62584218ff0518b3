#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/errors.hpp"

namespace cbs {

using basis_label = std::uint64_t;
using cplx = std::complex<double>;

/// Pauli string on n_qubits qubits in the symplectic encoding: the letter at
/// qubit s is I/X/Z/Y for (x,z) bit pairs (0,0)/(1,0)/(0,1)/(1,1).
/// Qubit s corresponds to bit s of a basis label (qubit 0 = least significant).
struct PauliString {
    int n_qubits = 1;
    std::uint64_t x_mask = 0;
    std::uint64_t z_mask = 0;

    static PauliString identity(int n_qubits);

    /// Parses the text form "X0 Y2 Z3" (empty string = identity).
    static PauliString parse(int n_qubits, std::string_view text);

    /// Text form with tokens in ascending qubit order; "" for the identity.
    std::string str() const;

    char letter(int qubit) const;
    bool is_identity() const { return x_mask == 0 && z_mask == 0; }
    int weight() const;

    friend bool operator==(const PauliString&, const PauliString&) = default;
};

struct PauliTerm {
    double coeff = 0.0;
    PauliString string;
};

/// Hermitian operator O = sum_i c_i P_i with real coefficients.
/// Duplicate strings are merged on construction; terms whose merged
/// coefficient has magnitude below 1e-14 are dropped.
class Observable {
  public:
    Observable(int n_qubits, std::vector<PauliTerm> terms);

    int n_qubits() const { return n_qubits_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

  private:
    int n_qubits_;
    std::vector<PauliTerm> terms_;
};

/// Reads the JSON form {"n_qubits":N,"terms":[{"coeff":c,"pauli":"X0 Z2"},...]}.
Observable parse_observable(std::string_view json_text);
Observable load_observable(const std::string& path);
std::string observable_to_json(const Observable& o);

/// True iff at every qubit the two letters commute (either is I or they are equal).
bool qubit_wise_commutes(const PauliString& p, const PauliString& q);

/// True iff the strings commute as matrices (symplectic inner product even).
bool generally_commutes(const PauliString& p, const PauliString& q);

/// <m|P|n>: nonzero exactly when m == n XOR x_mask, with unit-modulus value
/// i^{|x&z|} (-1)^{|n&z|}.
cplx pauli_transition(basis_label m, const PauliString& p, basis_label n);

/// <m|O|n> = sum_i c_i <m|P_i|n>.
cplx observable_transition(basis_label m, const Observable& o, basis_label n);

/// out += O * in over dense amplitude vectors of size 2^N (out must be
/// zero-initialized by the caller for a plain product).
void apply_observable(const Observable& o, std::span<const cplx> in, std::span<cplx> out);

/// Largest singular value of O: dense diagonalization for N <= 10, otherwise
/// power iteration on O^2 with matrix-free application (tolerance 1e-8).
double operator_inf_norm(const Observable& o);

}  // namespace cbs
