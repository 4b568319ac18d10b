#include <benchmark/benchmark.h>

#include "ethsim/gates.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/indirect.hpp"
#include "ethsim/rng.hpp"
#include "ethsim/star_algebra.hpp"
#include "ethsim/state.hpp"

using namespace ethsim;

namespace {

ComplexMatrix plus_density() { return ComplexMatrix::Constant(2, 2, 0.5); }

ComplexMatrix ground(std::size_t n) {
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    g(0, 0) = 1.0;
    return g;
}

ChainModel cnot_chain(std::size_t T, bool pointers) {
    return ChainModel::from_local_gates(2, 2, T, {gates::cnot(2, 2)},
                                        ChainModel::Product{plus_density(), ground(2)}, pointers);
}

ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(rng.normal(), rng.normal());
    return m + m.adjoint();
}

}  // namespace

static void BM_GenerateAndCommutant(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    const ComplexMatrix h = random_hermitian(n / 2, rng);
    const ComplexMatrix gen = kron(h, identity(2));
    for (auto _ : state) {
        const StarAlgebra a = generate_algebra({gen}, n);
        benchmark::DoNotOptimize(commutant(a).dim());
    }
}
BENCHMARK(BM_GenerateAndCommutant)->Arg(4)->Arg(6)->Arg(8);

static void BM_FutureAlgebra(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const ChainModel m = cnot_chain(T, false);
        benchmark::DoNotOptimize(m.future_algebra(1).dim());
    }
}
BENCHMARK(BM_FutureAlgebra)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_DetectEvent(benchmark::State& state) {
    const ChainModel m = cnot_chain(static_cast<std::size_t>(state.range(0)), true);
    const StarAlgebra& E = m.future_algebra(1);
    for (auto _ : state) benchmark::DoNotOptimize(detect_event(m.initial_state(), E, 1).actual);
}
BENCHMARK(BM_DetectEvent)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_EnumerateTree(benchmark::State& state) {
    const ChainModel m = ChainModel::from_local_gates(
        2, 2, 3, {gates::partial_swap(2, 2, 0.4)}, ChainModel::Product{plus_density(), ground(2)}, true);
    m.future_algebra(3);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_tree(m, 3, 0.0).nodes.size());
}
BENCHMARK(BM_EnumerateTree)->Unit(benchmark::kMillisecond);

static void BM_SampleHistories(benchmark::State& state) {
    const ChainModel m = cnot_chain(3, true);
    const HistorySampler sampler(m);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(3, seed++).steps.size());
}
BENCHMARK(BM_SampleHistories)->Unit(benchmark::kMicrosecond);

static void BM_ProbeWindowStep(benchmark::State& state) {
    const auto q = PhysicalQuantity::probe_z(2, 2);
    const ComplexMatrix gate =
        gates::sequence({gates::cnot(2, 2), gates::readout_rotation(2, 2, 0.6)});
    const ProbeWindow window(2, 2, ground(2), q.abstract_projections);
    Rng rng(3);
    ComplexMatrix rho = plus_density();
    std::size_t t = 0;
    for (auto _ : state) {
        if (++t % 400 == 0) rho = plus_density();
        benchmark::DoNotOptimize(window.step(rho, gate, t, rng).eta);
    }
}
BENCHMARK(BM_ProbeWindowStep)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
