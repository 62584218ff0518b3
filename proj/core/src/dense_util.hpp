#pragma once

#include <bit>

#include <Eigen/Dense>

#include "cbs/pauli.hpp"

namespace cbs::detail {

/// Dense 2^N x 2^N matrix of an Observable, filled term by term.
inline Eigen::MatrixXcd dense_observable(const Observable& o) {
    const std::size_t dim = std::size_t{1} << o.n_qubits();
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& term : o.terms()) {
        const std::uint64_t x = term.string.x_mask;
        const std::uint64_t z = term.string.z_mask;
        cplx base = term.coeff;
        switch (std::popcount(x & z) & 3) {
            case 1: base *= cplx{0.0, 1.0}; break;
            case 2: base *= -1.0; break;
            case 3: base *= cplx{0.0, -1.0}; break;
            default: break;
        }
        for (std::size_t n = 0; n < dim; ++n) {
            mat(n ^ x, n) += (std::popcount(n & z) & 1) ? -base : base;
        }
    }
    return mat;
}

}  // namespace cbs::detail
