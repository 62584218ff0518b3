// Microbenchmarks for the hot paths: transition elements, estimator
// assembly, grouping, and the sampling harness. Synthetic seeded inputs.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cbs/sampling.hpp"

namespace {

using cbs::cplx;
using cbs::Observable;
using cbs::StateVector;

Observable synthetic_observable(int n_qubits, std::size_t terms, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> coeff(0.0, 1.0);
    const std::uint64_t mask = (std::uint64_t{1} << n_qubits) - 1;
    std::vector<cbs::PauliTerm> out;
    out.reserve(terms);
    while (out.size() < terms) {
        cbs::PauliString p;
        p.n_qubits = n_qubits;
        p.x_mask = rng() & mask;
        p.z_mask = rng() & mask;
        if (p.is_identity()) continue;
        out.push_back({coeff(rng), p});
    }
    return Observable(n_qubits, std::move(out));
}

StateVector dense_random_state(int n_qubits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cplx> amps(std::size_t{1} << n_qubits);
    for (cplx& a : amps) a = cplx{gauss(rng), gauss(rng)};
    return StateVector(n_qubits, amps);
}

StateVector sparse_random_state(int n_qubits, std::size_t support, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cplx> amps(std::size_t{1} << n_qubits, cplx{0, 0});
    std::vector<std::size_t> labels(amps.size());
    std::iota(labels.begin(), labels.end(), 0);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < support; ++i) {
        amps[labels[i]] = cplx{1.0 + std::abs(gauss(rng)), gauss(rng)};
    }
    return StateVector(n_qubits, amps);
}

void BM_PauliTransition(benchmark::State& state) {
    const Observable o = synthetic_observable(12, 1, 1);
    const cbs::PauliString& p = o.terms()[0].string;
    std::uint64_t m = 0x0f3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::pauli_transition(m, p, m ^ p.x_mask));
        ++m;
    }
}
BENCHMARK(BM_PauliTransition);

void BM_ObservableTransition(benchmark::State& state) {
    const Observable o =
        synthetic_observable(12, static_cast<std::size_t>(state.range(0)), 2);
    std::uint64_t m = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::observable_transition(m & 0xfff, o, (m * 7) & 0xfff));
        ++m;
    }
}
BENCHMARK(BM_ObservableTransition)->Arg(32)->Arg(256);

void BM_ApplyObservable(benchmark::State& state) {
    const int n = 10;
    const Observable o = synthetic_observable(n, 64, 3);
    const StateVector psi = dense_random_state(n, 4);
    std::vector<cplx> out(psi.dim());
    for (auto _ : state) {
        std::fill(out.begin(), out.end(), cplx{0, 0});
        cbs::apply_observable(o, psi.amplitudes(), out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_ApplyObservable);

void BM_CbsExpectation(benchmark::State& state) {
    const int n = 10;
    const std::size_t r = static_cast<std::size_t>(state.range(0));
    const Observable o = synthetic_observable(n, 64, 5);
    const StateVector psi = sparse_random_state(n, r, 6);
    const cbs::TruncationResult trunc =
        cbs::truncate(cbs::basis_probabilities(psi), 1e-9);
    const cbs::InterferenceSet intf = cbs::interference_set(psi, trunc);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::cbs_expectation(o, trunc, intf, true));
    }
}
BENCHMARK(BM_CbsExpectation)->Arg(2)->Arg(8)->Arg(32);

void BM_StreamVariances(benchmark::State& state) {
    const int n = 10;
    const std::size_t r = static_cast<std::size_t>(state.range(0));
    const Observable o = synthetic_observable(n, 64, 7);
    const StateVector psi = sparse_random_state(n, r, 8);
    const cbs::TruncationResult trunc =
        cbs::truncate(cbs::basis_probabilities(psi), 1e-9);
    const cbs::InterferenceSet intf = cbs::interference_set(psi, trunc);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::cbs_stream_variances(o, trunc.labels, intf));
    }
}
BENCHMARK(BM_StreamVariances)->Arg(8)->Arg(32);

void BM_SortedInsertion(benchmark::State& state) {
    const Observable o =
        synthetic_observable(8, static_cast<std::size_t>(state.range(0)), 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::sorted_insertion(o, cbs::Relation::qwc));
    }
}
BENCHMARK(BM_SortedInsertion)->Arg(50)->Arg(200);

void BM_SampleBasis(benchmark::State& state) {
    const StateVector psi = dense_random_state(10, 10);
    const std::uint64_t l_f = static_cast<std::uint64_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::sample_basis(psi, l_f, ++seed));
    }
}
BENCHMARK(BM_SampleBasis)->Arg(1000)->Arg(100000);

void BM_GroundState(benchmark::State& state) {
    const Observable o = synthetic_observable(10, 50, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbs::ground_state(o));
    }
}
BENCHMARK(BM_GroundState)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
