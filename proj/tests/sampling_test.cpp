#include "cbs/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cbs/serialize.hpp"
#include "cbs/variance.hpp"
#include "oracles.hpp"

using cbs::CbsStreamVariances;
using cbs::cplx;
using cbs::Error;
using cbs::ErrorKind;
using cbs::ExperimentConfig;
using cbs::ExperimentResult;
using cbs::InterferenceSet;
using cbs::Observable;
using cbs::ReplicaResult;
using cbs::StateVector;
using cbs::TruncationResult;

namespace {

StateVector bell_state() {
    const double a = std::sqrt(0.5);
    return StateVector(2, {cplx{a, 0}, cplx{0, 0}, cplx{0, 0}, cplx{a, 0}});
}

}  // namespace

TEST(SplitSeed, DeterministicAndWellSpread) {
    EXPECT_EQ(cbs::split_seed(12345, 0), cbs::split_seed(12345, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(cbs::split_seed(7, i));
    for (std::uint64_t b = 0; b < 1000; ++b) {
        seen.insert(cbs::split_seed(100000 + b, 3));
    }
    EXPECT_EQ(seen.size(), 2000u);
}

TEST(SampleBasis, DeterministicCountsWithFullMass) {
    const StateVector zero(1, {cplx{1, 0}, cplx{0, 0}});
    const auto counts = cbs::sample_basis(zero, 500, 99);
    ASSERT_EQ(counts.size(), 1u);
    EXPECT_EQ(counts.at(0), 500u);

    const auto a = cbs::sample_basis(bell_state(), 2000, 4);
    const auto b = cbs::sample_basis(bell_state(), 2000, 4);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, cbs::sample_basis(bell_state(), 2000, 5));
}

TEST(SampleBasis, BellFrequenciesWithinFiveSigma) {
    const std::uint64_t l_f = 100000;
    const auto counts = cbs::sample_basis(bell_state(), l_f, 31);
    std::uint64_t total = 0;
    for (const auto& [label, count] : counts) {
        EXPECT_TRUE(label == 0 || label == 3);
        total += count;
    }
    EXPECT_EQ(total, l_f);
    const double sigma = std::sqrt(0.25 * l_f);
    EXPECT_NEAR(static_cast<double>(counts.at(0)), 0.5 * l_f, 5.0 * sigma);
}

TEST(SampleBernoulli, BoundaryAndMoments) {
    EXPECT_EQ(cbs::sample_bernoulli(0.0, 1000, 1), 0u);
    EXPECT_EQ(cbs::sample_bernoulli(1.0, 7, 1), 7u);
    EXPECT_EQ(cbs::sample_bernoulli(0.5, 0, 1), 0u);
    EXPECT_THROW(cbs::sample_bernoulli(-0.1, 10, 1), Error);
    EXPECT_THROW(cbs::sample_bernoulli(1.1, 10, 1), Error);

    const std::uint64_t shots = 200000;
    const double p = 0.3;
    const auto hits = cbs::sample_bernoulli(p, shots, 77);
    const double se = std::sqrt(p * (1 - p) * shots);
    EXPECT_NEAR(static_cast<double>(hits), p * shots, 3.0 * se);
}

TEST(ProcedureOne, BasisStateIsExactWithOnlyFrequencyShots) {
    std::mt19937_64 rng(61);
    const Observable o = oracle::random_observable(3, 9, rng);
    std::vector<cplx> amps(8, cplx{0, 0});
    amps[5] = cplx{1, 0};
    const StateVector psi(3, amps);

    ExperimentConfig cfg;
    cfg.l_f = 2000;
    const ReplicaResult rep = cbs::run_procedure_1(o, psi, cfg, 17);
    EXPECT_FALSE(rep.failed);
    EXPECT_EQ(rep.r_tilde, 1u);
    EXPECT_EQ(rep.total_shots, cfg.l_f);
    EXPECT_DOUBLE_EQ(rep.energy, cbs::observable_transition(5, o, 5).real());
}

TEST(ProcedureOne, DeterministicInSeed) {
    std::mt19937_64 rng(62);
    const Observable o = oracle::random_observable(2, 6, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 5000;
    const ReplicaResult a = cbs::run_procedure_1(o, psi, cfg, 23);
    const ReplicaResult b = cbs::run_procedure_1(o, psi, cfg, 23);
    EXPECT_EQ(a.energy, b.energy);
    EXPECT_EQ(a.total_shots, b.total_shots);
    EXPECT_EQ(a.r_tilde, b.r_tilde);
    const ReplicaResult c = cbs::run_procedure_1(o, psi, cfg, 24);
    EXPECT_NE(a.energy, c.energy);
}

TEST(ProcedureOne, ParticleFilterKeepsSectorOnly) {
    std::mt19937_64 rng(63);
    const Observable o = oracle::random_observable(2, 6, rng);
    // sqrt(0.5)|01> + sqrt(0.3)|10> + sqrt(0.2)|00>: the two-particle sector
    // is empty, the one-particle sector holds labels 1 and 2.
    const StateVector psi(2, {cplx{std::sqrt(0.2), 0}, cplx{std::sqrt(0.5), 0},
                              cplx{std::sqrt(0.3), 0}, cplx{0, 0}});
    ExperimentConfig cfg;
    cfg.l_f = 20000;
    cfg.epsilon_freq = 1e-6;
    cfg.particle_filter = 1;
    const ReplicaResult rep = cbs::run_procedure_1(o, psi, cfg, 5);
    EXPECT_FALSE(rep.failed);
    EXPECT_LE(rep.r_tilde, 2u);

    cfg.particle_filter = 2;
    EXPECT_THROW(cbs::run_procedure_1(o, psi, cfg, 5), Error);
}

TEST(ProcedureTwo, EigenstateHasZeroSpread) {
    const Observable o = cbs::parse_observable(R"({"n_qubits":2,"terms":[
        {"coeff":0.6,"pauli":"Z0"},{"coeff":0.4,"pauli":"Z0 Z1"}]})");
    std::vector<cplx> amps(4, cplx{0, 0});
    amps[2] = cplx{1, 0};
    const StateVector psi(2, amps);
    ExperimentConfig cfg;
    cfg.l_f = 1000;
    cfg.replicas_m = 20;
    cfg.base_seed = 7;
    const ExperimentResult res = cbs::run_procedure_2(o, psi, cfg);
    EXPECT_EQ(res.failures, 0u);
    EXPECT_NEAR(res.sd, 0.0, 1e-12);
    EXPECT_NEAR(res.sigma_one, 0.0, 1e-10);
    EXPECT_NEAR(res.mean, cbs::expectation(o, psi), 1e-14);
    EXPECT_DOUBLE_EQ(res.mean_shots, 1000.0);
}

TEST(ProcedureTwo, MeanTracksTrueValueWithinErrorBars) {
    std::mt19937_64 rng(64);
    const Observable o = oracle::random_observable(2, 6, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 4000;
    cfg.replicas_m = 400;
    cfg.base_seed = 11;
    const ExperimentResult res = cbs::run_procedure_2(o, psi, cfg);
    ASSERT_LT(res.failures, cfg.replicas_m / 10);
    const double want = cbs::expectation(o, psi);
    const std::size_t good = cfg.replicas_m - res.failures;
    EXPECT_NEAR(res.mean, want, 4.0 * res.sd / std::sqrt(static_cast<double>(good)));
    EXPECT_GT(res.sd, 0.0);
    EXPECT_GT(res.mean_shots, static_cast<double>(cfg.l_f));
}

TEST(ProcedureTwo, SigmaOneIsBudgetInvariant) {
    std::mt19937_64 rng(65);
    const Observable o = oracle::random_observable(2, 5, rng);
    const StateVector psi = oracle::random_state(2, rng, /*complex_amps=*/false);
    ExperimentConfig cfg;
    cfg.replicas_m = 300;
    cfg.base_seed = 3;

    cfg.l_f = 2000;
    const ExperimentResult small = cbs::run_procedure_2(o, psi, cfg);
    cfg.l_f = 8000;
    const ExperimentResult big = cbs::run_procedure_2(o, psi, cfg);
    ASSERT_EQ(small.failures, 0u);
    ASSERT_EQ(big.failures, 0u);
    // sd shrinks like 1/sqrt(L) while sigma_1 stays put.
    EXPECT_LT(big.sd, small.sd);
    EXPECT_NEAR(big.sigma_one / small.sigma_one, 1.0, 0.25);
}

TEST(ProcedureTwo, SingleReplicaHasUndefinedSpread) {
    std::mt19937_64 rng(66);
    const Observable o = oracle::random_observable(2, 4, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 1000;
    cfg.replicas_m = 1;
    try {
        cbs::run_procedure_2(o, psi, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::undefined_sd);
    }
}

TEST(ProcedureTwo, ReplicaSeedsFollowSplitSequence) {
    std::mt19937_64 rng(67);
    const Observable o = oracle::random_observable(2, 5, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 2000;
    cfg.replicas_m = 5;
    cfg.base_seed = 101;
    const ExperimentResult res = cbs::run_procedure_2(o, psi, cfg);
    ASSERT_EQ(res.replicas.size(), 5u);
    for (std::uint64_t i = 0; i < 5; ++i) {
        EXPECT_EQ(res.replicas[i].seed, cbs::split_seed(101, i));
        const ReplicaResult direct =
            cbs::run_procedure_1(o, psi, cfg, cbs::split_seed(101, i));
        EXPECT_EQ(res.replicas[i].energy, direct.energy);
    }
}

TEST(ProcedureThree, SummarizesOuterRepeats) {
    std::mt19937_64 rng(68);
    const Observable o = oracle::random_observable(2, 5, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 1500;
    cfg.replicas_m = 30;
    cfg.outer_m_prime = 4;
    cfg.base_seed = 19;
    const cbs::OuterSummary summary = cbs::run_procedure_3(o, psi, cfg);
    ASSERT_EQ(summary.means.size(), 4u);
    ASSERT_EQ(summary.sigma_ones.size(), 4u);
    double mean = 0.0;
    for (double m : summary.means) mean += m;
    mean /= 4.0;
    EXPECT_NEAR(summary.mean_energy, mean, 1e-12);
    EXPECT_GT(summary.sd_energy, 0.0);
    EXPECT_GT(summary.mean_sigma_one, 0.0);

    cfg.outer_m_prime = 1;
    const cbs::OuterSummary single = cbs::run_procedure_3(o, psi, cfg);
    EXPECT_DOUBLE_EQ(single.sd_energy, 0.0);
    EXPECT_DOUBLE_EQ(single.sd_sigma_one, 0.0);
}

TEST(ExperimentSerialization, CsvAndJsonShapes) {
    std::mt19937_64 rng(69);
    const Observable o = oracle::random_observable(2, 5, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 1000;
    cfg.replicas_m = 3;
    cfg.base_seed = 2;
    const ExperimentResult res = cbs::run_procedure_2(o, psi, cfg);

    const std::string csv = cbs::experiment_to_csv(res);
    EXPECT_EQ(csv.rfind("seed,r_tilde,energy,total_shots\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);

    const std::string json = cbs::experiment_to_json(res);
    EXPECT_NE(json.find("\"sigma_one\""), std::string::npos);
    EXPECT_NE(json.find("\"replicas\""), std::string::npos);
}

TEST(ExperimentConfigValidation, RejectsBadModes) {
    std::mt19937_64 rng(70);
    const Observable o = oracle::random_observable(2, 4, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.allocation_mode = "haar";
    EXPECT_THROW(cbs::run_procedure_1(o, psi, cfg, 1), Error);
    cfg.allocation_mode = "exact";
    cfg.epsilon_freq = 0.0;
    EXPECT_THROW(cbs::run_procedure_1(o, psi, cfg, 1), Error);
    cfg.epsilon_freq = 1e-4;
    cfg.l_f = 0;
    EXPECT_THROW(cbs::run_procedure_1(o, psi, cfg, 1), Error);
}

TEST(ProcedureOne, HeuristicAllocationRuns) {
    std::mt19937_64 rng(71);
    const Observable o = oracle::random_observable(2, 6, rng);
    const StateVector psi = oracle::random_state(2, rng);
    ExperimentConfig cfg;
    cfg.l_f = 5000;
    cfg.allocation_mode = "heuristic";
    cfg.w = 0.75;
    const ReplicaResult rep = cbs::run_procedure_1(o, psi, cfg, 9);
    EXPECT_FALSE(rep.failed);
    EXPECT_GT(rep.total_shots, cfg.l_f);
    EXPECT_TRUE(std::isfinite(rep.energy));
}

TEST(ProcedureTwo, EnergiesConcentrateNearPredictedSigma) {
    // Two-state superposition with a coupling observable: the analytic stream
    // variances should describe the replica scatter to within sampling error.
    // The state is deliberately asymmetric; at equal weights the frequency
    // gradients coincide and v_f degenerates to zero.  The ratio-form
    // estimator carries an O(1/l_f) bias, so the mean check adds that
    // allowance on top of the standard error of the replica mean.
    const Observable o = cbs::parse_observable(R"({"n_qubits":2,"terms":[
        {"coeff":0.5,"pauli":"Z0 Z1"},{"coeff":0.25,"pauli":"X0 X1"}]})");
    const StateVector psi(2, {cplx{std::sqrt(0.7), 0}, cplx{0, 0}, cplx{0, 0},
                              cplx{std::sqrt(0.3), 0}});
    ExperimentConfig cfg;
    cfg.l_f = 20000;
    cfg.replicas_m = 200;
    cfg.base_seed = 13;
    const ExperimentResult res = cbs::run_procedure_2(o, psi, cfg);
    ASSERT_EQ(res.failures, 0u);
    EXPECT_NEAR(res.mean, cbs::expectation(o, psi),
                5.0 * res.sd / std::sqrt(200.0) + 1.0 / cfg.l_f);
    EXPECT_GT(res.sigma_one, 0.0);

    const TruncationResult trunc =
        cbs::truncate(cbs::basis_probabilities(psi), 1e-12);
    const InterferenceSet intf = cbs::interference_set(psi, trunc);
    const CbsStreamVariances sv = cbs::cbs_stream_variances(o, trunc.labels, intf);
    ASSERT_GT(sv.v_f, 0.0);
    double predicted = sv.v_f / cfg.l_f;
    for (const auto& streams : {sv.v_a, sv.v_b}) {
        for (double v : streams) {
            if (v <= 0.0) continue;
            const auto shots = std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(
                       std::llround(std::sqrt(v / sv.v_f) * cfg.l_f)));
            predicted += v / shots;
        }
    }
    EXPECT_GT(res.sd * res.sd, 0.7 * predicted);
    EXPECT_LT(res.sd * res.sd, 1.3 * predicted);
}
