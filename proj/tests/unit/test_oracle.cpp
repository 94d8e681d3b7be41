#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "htc/error.hpp"
#include "htc/oracle.hpp"
#include "htc/perturb.hpp"
#include "test_util.hpp"

using namespace htc;

namespace {

HtcParams params(int n, double w, double lambda) {
  HtcParams p;
  p.n_molecules = n;
  p.disorder_width = w;
  p.lambda = lambda;
  return p;
}

const TailOperator kTails = tail_operator(TailConfig::from_eta0(0.01), 5);

// term-by-term Kronecker construction in the (ph, e1, v1, ..., eN, vN) product space,
// projected onto the single-excitation sector
RMatrix kron_hamiltonian(const HamiltonianTermList& t, int nmax) {
  const int n = t.n_molecules();
  std::vector<int> dims{2};
  for (int i = 0; i < n; ++i) {
    dims.push_back(2);
    dims.push_back(nmax + 1);
  }
  const CMatrix a = annihilation(1), b = annihilation(nmax);
  CMatrix sp = CMatrix::Zero(2, 2);
  sp(1, 0) = 1.0;
  const CMatrix ne = sp * sp.adjoint();
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  CMatrix h = CMatrix::Zero(total, total);
  CMatrix q = test::embed(dims, 0, a.adjoint() * a);
  for (int i = 0; i < n; ++i) {
    const int e = 1 + 2 * i, v = 2 + 2 * i;
    h += t.onsite_exc[i] * test::embed(dims, e, ne) + t.onsite_vib * test::embed(dims, v, b.adjoint() * b) +
         t.holstein * test::embed(dims, e, ne) * test::embed(dims, v, b + b.adjoint()) +
         t.cavity_coupling * (test::embed(dims, 0, a) * test::embed(dims, e, sp) +
                              test::embed(dims, 0, a.adjoint()) * test::embed(dims, e, sp.adjoint()));
    q += test::embed(dims, e, ne);
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < total; ++i)
    if (std::abs(q(i, i).real() - 1.0) < 1e-12) keep.push_back(i);
  RMatrix out(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = h(keep[i], keep[j]).real();
  return out;
}

RVector spectrum(const RMatrix& h) { return Eigen::SelfAdjointEigenSolver<RMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues(); }

}  // namespace

TEST(DenseBasis, BijectionAndDimension) {
  const DenseBasis b(3, 2);
  EXPECT_EQ(b.n_configs(), 27u);
  EXPECT_EQ(b.dim(), 4u * 27u);
  for (std::size_t c = 0; c < b.n_configs(); ++c) EXPECT_EQ(b.find(b.config(c)), static_cast<std::int64_t>(c));
  EXPECT_EQ(b.find({3, 0, 0}), -1);
  const DenseBasis capped(3, 2, 1);
  EXPECT_EQ(capped.n_configs(), 4u);
}

TEST(DenseHamiltonian, JaynesCummingsBlock) {
  const auto p = params(1, 0.0, 0.0);
  const auto h = build_dense_hamiltonian(build_term_list(p, zero_disorder(1)), DenseBasis(1, 0));
  ASSERT_EQ(h.rows(), 2);
  EXPECT_EQ(h(0, 0), 0.0);
  EXPECT_EQ(h(1, 1), 0.0);
  EXPECT_EQ(h(0, 1), 1.0);
  EXPECT_EQ(h(1, 0), 1.0);
}

TEST(DenseHamiltonian, RelabelingSymmetry) {
  auto p = params(2, 0.0, 0.4);
  auto t1 = build_term_list(p, zero_disorder(2));
  auto t2 = t1;
  t1.onsite_exc = {0.1, -0.1};
  t2.onsite_exc = {-0.1, 0.1};
  const DenseBasis b(2, 3);
  EXPECT_LT((spectrum(build_dense_hamiltonian(t1, b)) - spectrum(build_dense_hamiltonian(t2, b))).norm(), 1e-12);
}

TEST(DenseHamiltonian, DualConstructionAgrees) {
  const auto p = params(3, 0.5, 0.4);
  const auto t = build_term_list(p, sample_disorder(p, 2024));
  const RMatrix walk = build_dense_hamiltonian(t, DenseBasis(3, 3));
  const RMatrix kr = kron_hamiltonian(t, 3);
  ASSERT_EQ(walk.rows(), kr.rows());
  EXPECT_LT((spectrum(walk) - spectrum(kr)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DenseHamiltonian, HermitianAndChargeConserving) {
  const auto p = params(3, 0.5, 0.4);
  const DenseBasis b(3, 4);
  const RMatrix h = build_dense_hamiltonian(build_term_list(p, sample_disorder(p, 1)), b);
  EXPECT_LT((h - h.transpose()).norm(), 1e-12);
  const RMatrix q = dense_charge_operator(b);
  EXPECT_LT((h * q - q * h).norm(), 1e-12);
}

TEST(DenseHamiltonian, CapExceeded) {
  const auto p = params(4, 0.0, 0.4);
  try {
    build_dense_hamiltonian(build_term_list(p, zero_disorder(4)), DenseBasis(4, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cap_exceeded);
  }
}

TEST(EvolveExact, InitialRecordAndNorm) {
  const auto p = params(2, 0.5, 0.4);
  const auto t = build_term_list(p, sample_disorder(p, 1));
  const auto s = evolve_exact(t, DenseBasis(2, 4), Excitation::on_molecule(1), {20.0, 0.1, 10}, kTails);
  EXPECT_EQ(s.method, "ed");
  EXPECT_EQ(s.records[0].t, 0.0);
  EXPECT_EQ(s.records[0].n_exc[0], 1.0);
  EXPECT_EQ(s.records[0].s_vib, 0.0);
  for (const auto& r : s.records) EXPECT_NEAR(r.norm, 1.0, 1e-10);
}

TEST(EvolveExact, DisorderFreeSurvival) {
  const auto p = params(2, 0.0, 0.0);
  const auto s = evolve_exact(build_term_list(p, zero_disorder(2)), DenseBasis(2, 4), Excitation::on_molecule(1),
                              {10.0, 0.1, 1}, kTails);
  for (const auto& r : s.records) EXPECT_NEAR(r.n_exc[0], survival_tc_exact(2, r.t).value, 1e-10);
}

TEST(EvolveExact, SingleMoleculeRabi) {
  const auto p = params(1, 0.0, 0.0);
  const auto s = evolve_exact(build_term_list(p, zero_disorder(1)), DenseBasis(1, 4), Excitation::cavity(),
                              {5.0, 0.05, 1}, kTails);
  for (const auto& r : s.records) EXPECT_NEAR(r.n_ph, std::cos(r.t) * std::cos(r.t), 1e-10);
}

TEST(DarkWeight, ZeroWithoutDisorder) {
  const auto p = params(20, 0.0, 0.0);
  const auto d = dark_photon_weight_numeric(p, zero_disorder(20));
  EXPECT_NEAR(d.weight, 0.0, 1e-12);
  EXPECT_FALSE(d.ambiguous);
}

TEST(DarkWeight, EnsembleMeanMatchesPerturbation) {
  auto p = params(100, 0.1, 0.0);
  double mean = 0.0;
  for (int k = 0; k < 64; ++k) mean += dark_photon_weight_numeric(p, sample_disorder(p, 1 + k)).weight / 64;
  EXPECT_NEAR(mean, 0.0099, 0.15 * 0.0099);
}

TEST(DarkWeight, SingleRealizationMatchesFourierSum) {
  for (double w : {0.1, 0.05, 0.025}) {
    auto p = params(30, w, 0.0);
    const auto r = sample_disorder(p, 3);
    const double numeric = dark_photon_weight_numeric(p, r).weight;
    const double fourier = dark_photon_weight_fourier(r).value;
    EXPECT_LT(std::abs(numeric - fourier), 3 * w * w * w) << w;
  }
}

TEST(DarkWeight, AmbiguityFlaggedInWeakCoupling) {
  auto p = params(20, 3.0, 0.0);
  EXPECT_TRUE(dark_photon_weight_numeric(p, sample_disorder(p, 4)).ambiguous);
}

TEST(DarkWeight, InitialMoleculeProjection) {
  // weight of sigma_1^+ on the photon-free eigenvectors of the N = 2 Tavis-Cummings Hamiltonian
  const auto p = params(2, 0.0, 0.0);
  const RMatrix h = electro_photonic_hamiltonian(p, zero_disorder(2));
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(h);
  double dark = 0.0;
  for (int k = 0; k < 3; ++k)
    if (std::abs(eig.eigenvectors()(0, k)) < 1e-12) dark += eig.eigenvectors()(1, k) * eig.eigenvectors()(1, k);
  EXPECT_NEAR(dark, dark_weight_initial_molecule(2).value, 1e-12);
  EXPECT_NEAR(dark, 0.5, 1e-12);
}

TEST(DenseVibDensityMatrix, TraceAndHermiticity) {
  const auto p = params(2, 0.5, 0.4);
  const DenseBasis b(2, 4);
  CVector psi;
  evolve_exact(build_term_list(p, sample_disorder(p, 1)), b, Excitation::cavity(), {15.0, 0.1, 10}, kTails, &psi);
  for (int n = 0; n < 2; ++n) {
    const CMatrix rho = dense_vib_density_matrix(b, psi, n);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
    EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<CMatrix>(rho).eigenvalues().minCoeff(), -1e-10);
  }
}
