#include "cbs/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "cbs/estimator.hpp"

namespace cbs {

std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

// 53-bit mantissa uniform in [0, 1); avoids the library distribution so the
// stream is identical across standard library implementations.
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.l_f < 1 || cfg.replicas_m < 1 || cfg.outer_m_prime < 1) {
        throw Error(ErrorKind::domain, "shot and repetition counts must be >= 1");
    }
    if (!(cfg.epsilon_freq > 0.0) || !(cfg.epsilon_freq < 1.0)) {
        throw Error(ErrorKind::domain, "epsilon_freq must lie in (0, 1)");
    }
    if (cfg.allocation_mode != "exact" && cfg.allocation_mode != "heuristic") {
        throw Error(ErrorKind::parse,
                    "unknown allocation mode '" + cfg.allocation_mode + "'");
    }
}

}  // namespace

std::map<basis_label, std::uint64_t> sample_basis(const StateVector& psi, std::uint64_t l_f,
                                                  std::uint64_t seed) {
    if (l_f < 1) throw Error(ErrorKind::domain, "l_f must be >= 1");
    const auto probs = basis_probabilities(psi);
    if (probs.empty()) throw Error(ErrorKind::empty_support, "state has no basis support");

    std::vector<basis_label> labels;
    std::vector<double> cumulative;
    labels.reserve(probs.size());
    cumulative.reserve(probs.size());
    double running = 0.0;
    for (const auto& [label, p] : probs) {
        running += p;
        labels.push_back(label);
        cumulative.push_back(running);
    }

    std::mt19937_64 rng(seed);
    std::map<basis_label, std::uint64_t> counts;
    for (std::uint64_t shot = 0; shot < l_f; ++shot) {
        const double u = uniform01(rng) * running;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t idx =
            it == cumulative.end() ? cumulative.size() - 1
                                   : static_cast<std::size_t>(it - cumulative.begin());
        ++counts[labels[idx]];
    }
    return counts;
}

std::uint64_t sample_bernoulli(double p, std::uint64_t shots, std::uint64_t seed) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw Error(ErrorKind::domain, "Bernoulli probability must lie in [0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::uint64_t hits = 0;
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        if (uniform01(rng) < p) ++hits;
    }
    return hits;
}

ReplicaResult run_procedure_1(const Observable& o, const StateVector& psi,
                              const ExperimentConfig& cfg, std::uint64_t seed) {
    validate_config(cfg);
    ReplicaResult result;
    result.seed = seed;

    // Step 1: estimate the basis distribution from l_f shots.
    auto counts = sample_basis(psi, cfg.l_f, split_seed(seed, 0));
    std::uint64_t kept_shots = cfg.l_f;
    if (cfg.particle_filter) {
        const int target = *cfg.particle_filter;
        kept_shots = 0;
        for (auto it = counts.begin(); it != counts.end();) {
            if (std::popcount(it->first) != target) {
                it = counts.erase(it);
            } else {
                kept_shots += it->second;
                ++it;
            }
        }
        if (kept_shots == 0) {
            throw Error(ErrorKind::empty_support,
                        "particle filter rejected every sampled outcome");
        }
    }

    std::vector<std::pair<basis_label, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<basis_label> labels;
    std::vector<double> f_hat;
    std::uint64_t selected_shots = 0;
    for (const auto& [label, count] : ranked) {
        labels.push_back(label);
        f_hat.push_back(static_cast<double>(count) / static_cast<double>(kept_shots));
        selected_shots += count;
        if (static_cast<double>(selected_shots) >
            (1.0 - cfg.epsilon_freq) * static_cast<double>(kept_shots)) {
            break;
        }
    }
    const std::size_t R = labels.size();
    result.r_tilde = R;
    result.total_shots = cfg.l_f;

    const double kept_weight =
        static_cast<double>(selected_shots) / static_cast<double>(kept_shots);
    TruncationResult trunc_hat;
    trunc_hat.labels = labels;
    trunc_hat.weights = f_hat;
    trunc_hat.norm_factor = 1.0 / std::sqrt(kept_weight);
    trunc_hat.infidelity = std::max(0.0, 1.0 - kept_weight);

    try {
        if (R == 1) {
            const InterferenceSet intf(f_hat, {});
            result.energy = cbs_expectation(o, trunc_hat, intf, cfg.normalize);
            return result;
        }

        // Step 2: shot allocation from single-shot stream variances computed
        // with the exact amplitudes of psi at the selected labels.
        TruncationResult trunc_true;
        trunc_true.labels = labels;
        for (basis_label z : labels) {
            trunc_true.weights.push_back(std::norm(psi.amp(z)));
        }
        const CbsStreamVariances v =
            cfg.allocation_mode == "heuristic"
                ? heuristic_variances(o, labels, cfg.w)
                : cbs_stream_variances(o, labels, interference_set(psi, trunc_true));

        const bool any_ab =
            std::any_of(v.v_a.begin(), v.v_a.end(), [](double x) { return x > 0.0; }) ||
            std::any_of(v.v_b.begin(), v.v_b.end(), [](double x) { return x > 0.0; });
        if (v.v_f == 0.0 && any_ab) {
            result.failed = true;  // allocation ratio undefined
            return result;
        }
        auto stream_shots = [&](double var) -> std::uint64_t {
            if (var <= 0.0) return 0;
            const double ratio = std::sqrt(var / v.v_f) * static_cast<double>(cfg.l_f);
            return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(ratio)));
        };

        // Step 3: sample the interference streams; zero-variance streams keep
        // their classically computed outcome probabilities.
        std::vector<cplx> g_hat(R - 1);
        for (std::size_t r = 2; r <= R; ++r) {
            auto [a, b] = ab_probabilities(psi, labels[0], labels[r - 1]);
            const std::uint64_t la = stream_shots(v.v_a[r - 2]);
            const std::uint64_t lb = stream_shots(v.v_b[r - 2]);
            if (la > 0) {
                a = static_cast<double>(sample_bernoulli(a, la, split_seed(seed, 2 * r))) /
                    static_cast<double>(la);
                result.total_shots += la;
            }
            if (lb > 0) {
                b = static_cast<double>(
                        sample_bernoulli(b, lb, split_seed(seed, 2 * r + 1))) /
                    static_cast<double>(lb);
                result.total_shots += lb;
            }
            g_hat[r - 2] = cplx{a, b} - cplx{0.5, 0.5} * (f_hat[0] + f_hat[r - 1]);
        }

        const InterferenceSet intf(f_hat, std::move(g_hat));
        result.energy = cbs_expectation(o, trunc_hat, intf, cfg.normalize);
    } catch (const Error&) {
        result.failed = true;
    }
    return result;
}

ExperimentResult run_procedure_2(const Observable& o, const StateVector& psi,
                                 const ExperimentConfig& cfg) {
    validate_config(cfg);
    ExperimentResult result;
    result.replicas.reserve(cfg.replicas_m);
    for (std::uint64_t i = 0; i < cfg.replicas_m; ++i) {
        const std::uint64_t seed = split_seed(cfg.base_seed, i);
        try {
            result.replicas.push_back(run_procedure_1(o, psi, cfg, seed));
        } catch (const Error&) {
            ReplicaResult failed;
            failed.seed = seed;
            failed.failed = true;
            result.replicas.push_back(failed);
        }
    }

    double sum_e = 0.0;
    double sum_shots = 0.0;
    std::uint64_t good = 0;
    for (const ReplicaResult& rep : result.replicas) {
        if (rep.failed) {
            ++result.failures;
            continue;
        }
        sum_e += rep.energy;
        sum_shots += static_cast<double>(rep.total_shots);
        ++good;
    }
    if (good < 2) {
        throw Error(ErrorKind::undefined_sd,
                    "fewer than two successful replicas (" + std::to_string(good) + ")");
    }
    result.mean = sum_e / static_cast<double>(good);
    result.mean_shots = sum_shots / static_cast<double>(good);
    double ss = 0.0;
    for (const ReplicaResult& rep : result.replicas) {
        if (rep.failed) continue;
        const double d = rep.energy - result.mean;
        ss += d * d;
    }
    result.sd = std::sqrt(ss / static_cast<double>(good - 1));
    result.sigma_one = result.sd * std::sqrt(result.mean_shots);
    return result;
}

OuterSummary run_procedure_3(const Observable& o, const StateVector& psi,
                             const ExperimentConfig& cfg) {
    validate_config(cfg);
    OuterSummary summary;
    for (std::uint64_t j = 0; j < cfg.outer_m_prime; ++j) {
        ExperimentConfig inner = cfg;
        inner.base_seed = split_seed(cfg.base_seed, 1'000'003 + j);
        const ExperimentResult res = run_procedure_2(o, psi, inner);
        summary.means.push_back(res.mean);
        summary.sigma_ones.push_back(res.sigma_one);
    }
    auto mean_sd = [](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = xs.size() < 2 ? 0.0 : std::sqrt(ss / (n - 1.0));
        return std::pair{mean, sd};
    };
    std::tie(summary.mean_energy, summary.sd_energy) = mean_sd(summary.means);
    std::tie(summary.mean_sigma_one, summary.sd_sigma_one) = mean_sd(summary.sigma_ones);
    return summary;
}

}  // namespace cbs
