#pragma once

#include <optional>

#include "cbs/variance.hpp"

namespace cbs {

/// Derives an independent, replayable stream seed from a base seed and an
/// index (SplitMix64 of base + (index+1) * golden ratio increment).
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index);

struct ExperimentConfig {
    std::uint64_t l_f = 10000;
    double epsilon_freq = 1e-4;  // cumulative-frequency threshold for R-tilde
    std::uint64_t replicas_m = 100;
    std::uint64_t outer_m_prime = 1;
    std::uint64_t base_seed = 0;
    bool normalize = true;  // apply the sampled normalization factor
    double w = 0.75;        // heuristic weight when allocation_mode is heuristic
    std::string allocation_mode = "exact";
    std::optional<int> particle_filter;
};

/// l_f multinomial draws from the basis distribution of psi.
std::map<basis_label, std::uint64_t> sample_basis(const StateVector& psi, std::uint64_t l_f,
                                                  std::uint64_t seed);

/// Number of successes in `shots` Bernoulli(p) trials.
std::uint64_t sample_bernoulli(double p, std::uint64_t shots, std::uint64_t seed);

struct ReplicaResult {
    std::uint64_t seed = 0;
    std::uint64_t r_tilde = 0;
    double energy = 0.0;
    std::uint64_t total_shots = 0;
    bool failed = false;
};

/// One full sampling replica:
///  1) sample the basis l_f times, keep the most-frequent states until their
///     cumulative relative frequency exceeds 1 - epsilon_freq, estimate f_r
///     and the normalization from the counts;
///  2) allocate A/B shots from stream variances computed with the exact
///     amplitudes of psi at the selected labels, keeping l_f fixed
///     (L_{A_r} = round(l_f sqrt(v_{A_r}/v_f)), likewise for B);
///  3) sample the A/B outcome frequencies and assemble the estimator from
///     the sampled quantities. Streams with zero single-shot variance are
///     not sampled; their exact values from step 2 are substituted.
ReplicaResult run_procedure_1(const Observable& o, const StateVector& psi,
                              const ExperimentConfig& cfg, std::uint64_t seed);

struct ExperimentResult {
    std::vector<ReplicaResult> replicas;
    double mean = 0.0;        // mu over non-failed replicas
    double sd = 0.0;          // unbiased sigma'
    double mean_shots = 0.0;  // L-bar
    double sigma_one = 0.0;   // sigma' * sqrt(L-bar)
    std::uint64_t failures = 0;
};

/// Procedure 1 repeated replicas_m times; replica i uses
/// split_seed(base_seed, i).
ExperimentResult run_procedure_2(const Observable& o, const StateVector& psi,
                                 const ExperimentConfig& cfg);

struct OuterSummary {
    std::vector<double> means;       // mu_j per outer repeat
    std::vector<double> sigma_ones;  // (sigma_1)_j per outer repeat
    double mean_energy = 0.0;
    double sd_energy = 0.0;
    double mean_sigma_one = 0.0;
    double sd_sigma_one = 0.0;
};

/// Procedure 2 repeated outer_m_prime times; repeat j uses base seed
/// split_seed(base_seed, 1'000'003 + j).
OuterSummary run_procedure_3(const Observable& o, const StateVector& psi,
                             const ExperimentConfig& cfg);

}  // namespace cbs
