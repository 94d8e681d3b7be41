#include <benchmark/benchmark.h>

#include <random>

#include "htc/linalg.hpp"
#include "htc/meanfield.hpp"
#include "htc/mps.hpp"
#include "htc/observables.hpp"
#include "htc/oracle.hpp"
#include "htc/tebd.hpp"

using namespace htc;

namespace {

CMatrix random_theta(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

// an entangled N = 16 state at the requested bond dimension
Mps grown_state(int chi, Factorization f) {
  HtcParams p;
  p.n_molecules = 16;
  const LocalDims dims{1, 10};
  Mps::Options o;
  o.chi_max = chi;
  o.factorization = f;
  Mps m = init_product_state(p, Excitation::cavity(), dims, o);
  const auto gates = build_gates(build_term_list(p, sample_disorder(p, 7)), dims, 0.05);
  for (int k = 0; k < 120; ++k) step(m, gates);
  return m;
}

void BM_TruncatedSplit(benchmark::State& state) {
  const auto chi = state.range(0);
  const auto method = state.range(1) == 0 ? Factorization::svd : Factorization::density_matrix;
  const CMatrix theta = random_theta(chi * 2, chi * 11);
  const TruncationPolicy pol{static_cast<int>(chi), 1e-12, method};
  for (auto _ : state) benchmark::DoNotOptimize(truncated_split(theta, {}, {}, pol, Absorb::right));
}
BENCHMARK(BM_TruncatedSplit)->ArgsProduct({{16, 32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_TebdStep(benchmark::State& state) {
  const auto method = state.range(1) == 0 ? Factorization::svd : Factorization::density_matrix;
  Mps m = grown_state(static_cast<int>(state.range(0)), method);
  HtcParams p;
  p.n_molecules = 16;
  const auto gates = build_gates(build_term_list(p, sample_disorder(p, 7)), LocalDims{1, 10}, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(step(m, gates));
  state.counters["bond"] = m.max_bond_dim();
}
BENCHMARK(BM_TebdStep)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond)->Iterations(20);

void BM_Measure(benchmark::State& state) {
  const Mps m = grown_state(static_cast<int>(state.range(0)), Factorization::density_matrix);
  const auto tails = tail_operator(TailConfig::from_eta0(0.01), 11);
  for (auto _ : state) benchmark::DoNotOptimize(measure(m, 0.0, tails));
}
BENCHMARK(BM_Measure)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(10);

void BM_VibBlockEntropy(benchmark::State& state) {
  const Mps m = grown_state(static_cast<int>(state.range(0)), Factorization::density_matrix);
  for (auto _ : state) benchmark::DoNotOptimize(m.vib_block_entropy());
}
BENCHMARK(BM_VibBlockEntropy)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(10);

void BM_DensePropagation(benchmark::State& state) {
  HtcParams p;
  p.n_molecules = 3;
  const DenseBasis basis(3, static_cast<int>(state.range(0)));
  const auto h = build_dense_hamiltonian(build_term_list(p, sample_disorder(p, 1)), basis);
  for (auto _ : state) {
    DensePropagator prop(h);
    benchmark::DoNotOptimize(prop.propagate(dense_initial_state(basis, Excitation::cavity()), 1.0));
  }
  state.counters["dim"] = static_cast<double>(basis.dim());
}
BENCHMARK(BM_DensePropagation)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_MeanFieldStep(benchmark::State& state) {
  HtcParams p;
  p.n_molecules = static_cast<int>(state.range(0));
  const auto terms = build_term_list(p, sample_disorder(p, 1));
  MeanFieldState s = mf_initial_state(p.n_molecules, Excitation::cavity());
  for (auto _ : state) mf_rk4_step(s, terms, 0.001);
}
BENCHMARK(BM_MeanFieldStep)->Arg(16)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
