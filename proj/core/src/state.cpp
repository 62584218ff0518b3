#include "cbs/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "dense_util.hpp"

namespace cbs {

namespace {

constexpr int kDenseSolverMaxQubits = 10;
constexpr int kSolverMaxQubits = 16;
constexpr double kDegeneracyGap = 1e-10;

std::vector<cplx> fix_phase(std::vector<cplx> amps) {
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t n = 0; n < amps.size(); ++n) {
        const double mod = std::abs(amps[n]);
        if (mod > best) {
            best = mod;
            pivot = n;
        }
    }
    const cplx a = amps[pivot];
    if (a.imag() == 0.0 && a.real() >= 0.0) return amps;
    const cplx rotation = std::conj(a) / std::abs(a);
    for (auto& amp : amps) amp *= rotation;
    amps[pivot] = {std::abs(a), 0.0};
    return amps;
}

}  // namespace

StateVector::StateVector(int n_qubits, std::vector<cplx> amplitudes) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 63) {
        throw Error(ErrorKind::domain, "n_qubits must be in [1, 63]");
    }
    if (amplitudes.size() != (std::size_t{1} << n_qubits)) {
        throw Error(ErrorKind::dimension, "amplitude count does not equal 2^n_qubits");
    }
    double norm2 = 0.0;
    for (const auto& a : amplitudes) norm2 += std::norm(a);
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
        throw Error(ErrorKind::domain, "state vector has zero or non-finite norm");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    if (inv != 1.0) {
        for (auto& a : amplitudes) a *= inv;
    }
    amps_ = fix_phase(std::move(amplitudes));
}

double expectation(const Observable& o, const StateVector& psi) {
    if (o.n_qubits() != psi.n_qubits()) {
        throw Error(ErrorKind::dimension, "observable and state qubit counts differ");
    }
    std::vector<cplx> phi(psi.dim(), cplx{0.0, 0.0});
    apply_observable(o, psi.amplitudes(), phi);
    cplx value{0.0, 0.0};
    for (std::size_t n = 0; n < phi.size(); ++n) {
        value += std::conj(psi.amp(n)) * phi[n];
    }
    if (std::abs(value.imag()) > 1e-10) {
        throw Error(ErrorKind::domain, "expectation value has imaginary residue " +
                                           std::to_string(value.imag()));
    }
    return value.real();
}

namespace {

GroundStateResult dense_ground_state(const Observable& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(detail::dense_observable(h));
    const auto& values = solver.eigenvalues();
    const double energy = values(0);
    const bool degenerate = values.size() > 1 && (values(1) - values(0)) < kDegeneracyGap;

    const auto column = solver.eigenvectors().col(0);
    std::vector<cplx> amps(column.data(), column.data() + column.size());
    StateVector state(h.n_qubits(), std::move(amps));

    std::vector<cplx> residual_vec(state.dim(), cplx{0.0, 0.0});
    apply_observable(h, state.amplitudes(), residual_vec);
    double residual2 = 0.0;
    for (std::size_t n = 0; n < state.dim(); ++n) {
        residual2 += std::norm(residual_vec[n] - energy * state.amp(n));
    }
    return GroundStateResult{energy, std::move(state), std::sqrt(residual2), degenerate};
}

}  // namespace

GroundStateResult lanczos_ground_state(const Observable& h, double tol) {
    const std::size_t dim = std::size_t{1} << h.n_qubits();
    const std::size_t krylov_cap = std::min<std::size_t>(dim, 60);
    constexpr int kMaxRestarts = 200;

    std::vector<cplx> start(dim);
    {
        std::mt19937_64 rng(0x00C0FFEEu);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& a : start) a = {gauss(rng), 0.0};
    }

    auto normalize = [](std::vector<cplx>& v) {
        double norm2 = 0.0;
        for (const auto& a : v) norm2 += std::norm(a);
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& a : v) a *= inv;
    };
    normalize(start);

    double theta = 0.0;
    double residual = 0.0;
    double gap = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < kMaxRestarts; ++restart) {
        std::vector<std::vector<cplx>> basis;
        basis.reserve(krylov_cap);
        std::vector<double> alpha, beta;  // beta[j] couples basis j and j+1
        basis.push_back(start);

        for (std::size_t j = 0; j < krylov_cap; ++j) {
            std::vector<cplx> w(dim, cplx{0.0, 0.0});
            apply_observable(h, basis[j], w);
            double a_j = 0.0;
            for (std::size_t n = 0; n < dim; ++n) {
                a_j += std::real(std::conj(basis[j][n]) * w[n]);
            }
            alpha.push_back(a_j);
            // two passes of full reorthogonalization
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& q : basis) {
                    cplx overlap{0.0, 0.0};
                    for (std::size_t n = 0; n < dim; ++n) {
                        overlap += std::conj(q[n]) * w[n];
                    }
                    for (std::size_t n = 0; n < dim; ++n) w[n] -= overlap * q[n];
                }
            }
            double b2 = 0.0;
            for (const auto& a : w) b2 += std::norm(a);
            const double b = std::sqrt(b2);
            if (j + 1 == krylov_cap || b < 1e-13) break;
            beta.push_back(b);
            for (auto& a : w) a /= b;
            basis.push_back(std::move(w));
        }

        const std::size_t k = basis.size();
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t j = 0; j < k; ++j) {
            tri(j, j) = alpha[j];
            if (j + 1 < k) {
                tri(j, j + 1) = beta[j];
                tri(j + 1, j) = beta[j];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
        theta = small.eigenvalues()(0);
        gap = k > 1 ? small.eigenvalues()(1) - theta : gap;

        std::vector<cplx> ritz(dim, cplx{0.0, 0.0});
        for (std::size_t j = 0; j < k; ++j) {
            const double y_j = small.eigenvectors()(j, 0);
            for (std::size_t n = 0; n < dim; ++n) ritz[n] += y_j * basis[j][n];
        }
        normalize(ritz);

        std::vector<cplx> hr(dim, cplx{0.0, 0.0});
        apply_observable(h, ritz, hr);
        double r2 = 0.0;
        for (std::size_t n = 0; n < dim; ++n) r2 += std::norm(hr[n] - theta * ritz[n]);
        residual = std::sqrt(r2);

        if (residual <= tol) {
            StateVector state(h.n_qubits(), std::move(ritz));
            return GroundStateResult{theta, std::move(state), residual,
                                     gap < kDegeneracyGap};
        }
        start = std::move(ritz);
    }
    throw ConvergenceError("Lanczos failed to reach tolerance " + std::to_string(tol) +
                               "; residual " + std::to_string(residual),
                           theta - residual, theta + residual);
}

GroundStateResult ground_state(const Observable& h, double tol) {
    if (h.n_qubits() > kSolverMaxQubits) {
        throw Error(ErrorKind::domain, "ground-state solver limited to " +
                                           std::to_string(kSolverMaxQubits) + " qubits");
    }
    if (h.n_qubits() <= kDenseSolverMaxQubits) {
        GroundStateResult result = dense_ground_state(h);
        if (result.residual > tol) {
            throw ConvergenceError("dense solver residual exceeds tolerance",
                                   result.energy - result.residual,
                                   result.energy + result.residual);
        }
        return result;
    }
    return lanczos_ground_state(h, tol);
}

std::map<basis_label, double> basis_probabilities(const StateVector& psi, double prune) {
    std::map<basis_label, double> probs;
    for (std::size_t n = 0; n < psi.dim(); ++n) {
        const double p = std::norm(psi.amp(n));
        if (p > prune) probs.emplace(static_cast<basis_label>(n), p);
    }
    return probs;
}

std::pair<double, double> ab_probabilities(const StateVector& psi, basis_label m,
                                           basis_label n) {
    if (m >= psi.dim() || n >= psi.dim()) {
        throw Error(ErrorKind::domain, "basis label out of range");
    }
    if (m == n) {
        throw Error(ErrorKind::domain, "interference pair requires distinct labels");
    }
    const cplx am = psi.amp(m);
    const cplx an = psi.amp(n);
    const double a = 0.5 * std::norm(am + an);
    const double b = 0.5 * std::norm(am + cplx{0.0, 1.0} * an);
    return {std::clamp(a, 0.0, 1.0), std::clamp(b, 0.0, 1.0)};
}

void save_state(const std::string& path, const StateVector& psi) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    }
    auto put_u32 = [&out](std::uint32_t v) {
        char bytes[4];
        for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out.write(bytes, 4);
    };
    auto put_f64 = [&out](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
        out.write(bytes, 8);
    };
    put_u32(static_cast<std::uint32_t>(psi.n_qubits()));
    for (std::size_t n = 0; n < psi.dim(); ++n) {
        put_f64(psi.amp(n).real());
        put_f64(psi.amp(n).imag());
    }
    if (!out) {
        throw Error(ErrorKind::io, "short write to '" + path + "'");
    }
}

StateVector load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open '" + path + "'");
    }
    auto get_u32 = [&in]() {
        char bytes[4];
        in.read(bytes, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
        }
        return v;
    };
    auto get_f64 = [&in]() {
        char bytes[8];
        in.read(bytes, 8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
        }
        return std::bit_cast<double>(bits);
    };
    const std::uint32_t n_qubits = get_u32();
    if (!in || n_qubits < 1 || n_qubits > 63) {
        throw Error(ErrorKind::parse, "invalid state file header in '" + path + "'");
    }
    std::vector<cplx> amps(std::size_t{1} << n_qubits);
    for (auto& a : amps) {
        const double re = get_f64();
        const double im = get_f64();
        a = {re, im};
    }
    if (!in) {
        throw Error(ErrorKind::parse, "truncated state file '" + path + "'");
    }
    return StateVector(static_cast<int>(n_qubits), std::move(amps));
}

}  // namespace cbs
