#include "cbs/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace cbs {

namespace {

constexpr double kAnchorGuard = 1e-12;
constexpr double kFactorGuard = 1e-14;

}  // namespace

TruncationResult truncate(const std::map<basis_label, double>& probs, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw Error(ErrorKind::domain, "epsilon must lie in (0, 1)");
    }
    std::vector<std::pair<basis_label, double>> entries;
    entries.reserve(probs.size());
    double total = 0.0;
    for (const auto& [label, p] : probs) {
        if (p <= 0.0) continue;
        entries.emplace_back(label, p);
        total += p;
    }
    if (total > 1.0 + 1e-9) {
        throw Error(ErrorKind::domain, "probabilities sum to more than 1");
    }
    if (total < 1.0 - epsilon) {
        throw Error(ErrorKind::infeasible,
                    "total probability mass " + std::to_string(total) +
                        " cannot reach infidelity " + std::to_string(epsilon));
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    TruncationResult result;
    double kept = 0.0;
    for (const auto& [label, p] : entries) {
        result.labels.push_back(label);
        result.weights.push_back(p);
        kept += p;
        if (1.0 - kept <= epsilon) break;
    }
    result.infidelity = std::clamp(1.0 - kept, 0.0, 1.0);
    result.norm_factor = 1.0 / std::sqrt(kept);
    return result;
}

InterferenceSet::InterferenceSet(std::vector<double> weights, std::vector<cplx> g)
    : weights_(std::move(weights)), g_(std::move(g)) {
    if (!weights_.empty() && g_.size() + 1 != weights_.size()) {
        throw Error(ErrorKind::dimension,
                    "interference set needs exactly R-1 factors for R weights");
    }
}

cplx InterferenceSet::G(std::size_t r, std::size_t rp) const {
    const std::size_t R = weights_.size();
    if (r < 1 || rp < 1 || r > R || rp > R) {
        throw Error(ErrorKind::domain, "interference index out of range");
    }
    if (r == rp) return {weights_[r - 1], 0.0};
    if (r == 1) return g_[rp - 2];
    if (rp == 1) return std::conj(g_[r - 2]);
    return std::conj(g_[r - 2]) * g_[rp - 2] / weights_[0];
}

std::pair<double, double> InterferenceSet::ab(std::size_t r) const {
    if (r < 2 || r > weights_.size()) {
        throw Error(ErrorKind::domain, "interference index out of range");
    }
    const double shift = 0.5 * (weights_[0] + weights_[r - 1]);
    const cplx g = g_[r - 2];
    return {g.real() + shift, g.imag() + shift};
}

InterferenceSet interference_set(const StateVector& psi, const TruncationResult& trunc) {
    if (trunc.r() == 0) {
        throw Error(ErrorKind::domain, "empty truncation");
    }
    if (trunc.weights[0] < kAnchorGuard) {
        throw Error(ErrorKind::degenerate_anchor,
                    "anchor weight " + std::to_string(trunc.weights[0]) +
                        " below guard threshold");
    }
    const double f1_raw = std::norm(psi.amp(trunc.labels[0]));
    if (f1_raw < kAnchorGuard) {
        throw Error(ErrorKind::degenerate_anchor,
                    "anchor amplitude weight " + std::to_string(f1_raw) +
                        " below guard threshold");
    }
    // trunc.weights may come from a post-selected (renormalized) distribution.
    // Form g in the raw-amplitude frame, where a real state cancels the shift
    // exactly, then rescale into the truncation frame; subtracting a rescaled
    // shift instead would leave last-bit residue that later reads as a
    // spurious positive interference variance.
    const double scale = trunc.weights[0] / f1_raw;
    std::vector<cplx> g;
    g.reserve(trunc.r() - 1);
    for (std::size_t r = 2; r <= trunc.r(); ++r) {
        const auto [a, b] = ab_probabilities(psi, trunc.labels[0], trunc.labels[r - 1]);
        const double shift =
            0.5 * (f1_raw + std::norm(psi.amp(trunc.labels[r - 1])));
        g.emplace_back(scale * (a - shift), scale * (b - shift));
    }
    return InterferenceSet(trunc.weights, std::move(g));
}

double cbs_expectation(const Observable& o, const TruncationResult& trunc,
                       const InterferenceSet& intf, bool normalize) {
    const std::size_t R = trunc.r();
    if (R == 0) {
        throw Error(ErrorKind::domain, "empty truncation");
    }
    if (intf.r() != R) {
        throw Error(ErrorKind::dimension, "truncation and interference set sizes differ");
    }
    for (std::size_t i = 0; i < R; ++i) {
        if (trunc.weights[i] != intf.weights()[i]) {
            throw Error(ErrorKind::contract_violation,
                        "truncation and interference weights disagree");
        }
    }

    const auto& f = trunc.weights;
    const auto& z = trunc.labels;
    double sum = 0.0;
    for (std::size_t r = 1; r <= R; ++r) {
        sum += f[r - 1] * observable_transition(z[r - 1], o, z[r - 1]).real();
    }
    for (std::size_t r = 1; r <= R; ++r) {
        for (std::size_t rp = r + 1; rp <= R; ++rp) {
            const cplx el = observable_transition(z[r - 1], o, z[rp - 1]);
            if (el == cplx{0.0, 0.0}) continue;
            const cplx G = intf.G(r, rp);
            if (std::abs(G) < kFactorGuard) {
                throw Error(ErrorKind::ill_conditioned,
                            "pair factor G(" + std::to_string(r) + "," + std::to_string(rp) +
                                ") below guard threshold");
            }
            sum += 2.0 * (f[r - 1] * f[rp - 1] * (el / G)).real();
        }
    }
    if (normalize) sum *= trunc.norm_factor * trunc.norm_factor;
    return sum;
}

double truncation_bound(const Observable& o, double infidelity) {
    if (infidelity < -1e-12 || infidelity > 1.0 + 1e-12) {
        throw Error(ErrorKind::domain, "infidelity must lie in [0, 1]");
    }
    return 2.0 * operator_inf_norm(o) * std::sqrt(std::clamp(infidelity, 0.0, 1.0));
}

FilteredProbabilities symmetry_filter(const std::map<basis_label, double>& probs,
                                      int particle_number) {
    if (particle_number < 0) {
        throw Error(ErrorKind::domain, "particle number must be non-negative");
    }
    FilteredProbabilities out;
    double kept = 0.0;
    double total = 0.0;
    for (const auto& [label, p] : probs) {
        total += p;
        if (std::popcount(label) == particle_number) {
            out.probs.emplace(label, p);
            kept += p;
        }
    }
    if (out.probs.empty() || !(kept > 0.0)) {
        throw Error(ErrorKind::empty_support,
                    "no probability mass at particle number " +
                        std::to_string(particle_number));
    }
    for (auto& [label, p] : out.probs) p /= kept;
    out.rejected_mass = total - kept;
    return out;
}

}  // namespace cbs
