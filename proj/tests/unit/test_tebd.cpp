#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "htc/error.hpp"
#include "htc/oracle.hpp"
#include "htc/perturb.hpp"
#include "htc/tebd.hpp"
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

TailOperator tails_for(const LocalDims& dims) { return tail_operator(TailConfig::from_eta0(0.01), dims.vib_dim()); }

double unitarity_error(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

double max_abs_dev(const ObservableTimeSeries& a, const ObservableTimeSeries& b) {
  double d = 0.0;
  for (const auto& [name, v] : series_deviation(a, b)) d = std::max(d, v);
  return d;
}

}  // namespace

TEST(BuildGates, AllGatesUnitary) {
  const LocalDims dims{1, 6};
  const auto p = params(3, 0.5, 0.4);
  const auto g = build_gates(build_term_list(p, sample_disorder(p, 4)), dims, 0.01);
  for (const auto& u : g.local_half) EXPECT_LT(unitarity_error(u.matrix()), 1e-12);
  for (const auto& u : g.cavity_half_pe) EXPECT_LT(unitarity_error(u.matrix()), 1e-12);
  for (const auto& u : g.cavity_half_ep) EXPECT_LT(unitarity_error(u.matrix()), 1e-12);
  EXPECT_LT(unitarity_error(g.cavity_full_last.matrix()), 1e-12);
  EXPECT_EQ(g.local_half.size(), 3u);
}

TEST(BuildGates, DecoupledLocalGateIsBlockDiagonal) {
  const LocalDims dims{1, 4};
  auto p = params(2, 0.5, 0.0);
  p.delta = 0.1;
  const auto r = sample_disorder(p, 4);
  const auto terms = build_term_list(p, r);
  const double dt = 0.02, tau = dt / 2;
  const auto g = build_gates(terms, dims, dt);
  const CMatrix& u = g.local_half[1].matrix();
  const int dv = 5;
  for (int e = 0; e < 2; ++e)
    for (int v = 0; v < dv; ++v)
      for (int e2 = 0; e2 < 2; ++e2)
        for (int v2 = 0; v2 < dv; ++v2) {
          cplx expect = 0.0;
          if (e == e2 && v == v2) expect = std::polar(1.0, -(e * (0.1 + r.epsilons[1]) + 0.3 * v) * tau);
          EXPECT_LT(std::abs(u(e * dv + v, e2 * dv + v2) - expect), 1e-13);
        }
}

TEST(BuildGates, CavityGateSingleExcitationRotation) {
  const LocalDims dims{1, 2};
  const auto p = params(4, 0.0, 0.4);
  const auto terms = build_term_list(p, zero_disorder(4));
  const double dt = 0.3, gt = terms.cavity_coupling * dt / 2;
  const auto gates = build_gates(terms, dims, dt);
  const CMatrix& u = gates.cavity_half_pe[0].matrix();
  // basis (ph, exc): |1,0> = 2, |0,1> = 1
  EXPECT_NEAR(std::abs(u(2, 2) - std::cos(gt)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(1, 1) - std::cos(gt)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(1, 2) - cplx(0, -std::sin(gt))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(2, 1) - cplx(0, -std::sin(gt))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(0, 0) - 1.0), 0.0, 1e-14);
}

TEST(BuildGates, SmallStepApproachesIdentity) {
  const LocalDims dims{1, 4};
  const auto p = params(2, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 1));
  double prev = 1.0;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    const auto g = build_gates(terms, dims, dt);
    const double dev = (g.local_half[0].matrix() - CMatrix::Identity(10, 10)).norm();
    EXPECT_LT(dev, 10 * dt);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_THROW(build_gates(terms, dims, 0.0), Error);
  auto bad = terms;
  bad.holstein = std::nan("");
  EXPECT_THROW(build_gates(bad, dims, 0.01), Error);
}

TEST(Step, TavisCummingsCavityOscillation) {
  const LocalDims dims{1, 2};
  const auto p = params(4, 0.0, 0.0);
  Mps m = init_product_state(p, Excitation::cavity(), dims, {});
  const auto terms = build_term_list(p, zero_disorder(4));
  const auto series = evolve(m, terms, dims, {std::numbers::pi / 2, 0.01, 1}, tails_for(dims));
  for (const auto& r : series.records) {
    const double c = std::cos(r.t), s = std::sin(r.t);
    ASSERT_NEAR(r.n_ph, c * c, 1e-5) << r.t;
    for (double ne : r.n_exc) ASSERT_NEAR(ne, s * s / 4, 1e-5) << r.t;
  }
  EXPECT_NEAR(series.records.back().t, std::numbers::pi / 2, 1e-12);
}

TEST(Step, DecoupledDisplacement) {
  const LocalDims dims{1, 10};
  auto p = params(2, 0.0, 0.4);
  p.g_collective = 0.0;
  Mps m = init_product_state(p, Excitation::on_molecule(1), dims, {});
  const auto series = evolve(m, build_term_list(p, zero_disorder(2)), dims, {2 * std::numbers::pi / 0.3, 0.01, 20},
                             tails_for(dims));
  for (const auto& r : series.records)
    ASSERT_NEAR(r.x[0], std::sqrt(2.0) * 0.4 * (1 - std::cos(0.3 * r.t)), 1e-6) << r.t;
  EXPECT_EQ(series.records.back().s_vib, 0.0);
}

TEST(Step, ChargeConservedEveryStep) {
  const LocalDims dims{1, 5};
  const auto p = params(3, 0.5, 0.4);
  const auto gates = build_gates(build_term_list(p, sample_disorder(p, 2)), dims, 0.05);
  Mps m = init_product_state(p, Excitation::cavity(), dims, {});
  for (int k = 0; k < 20; ++k) {
    const auto rep = step(m, gates);
    const auto q = m.charge_moments();
    ASSERT_NEAR(q.mean, 1.0, 1e-10);
    ASSERT_LT(q.variance, 1e-10);
    EXPECT_EQ(rep.max_bond, m.max_bond_dim());
    EXPECT_EQ(m.label_at(0), photon_label());
  }
}

TEST(Step, RejectsPermutedState) {
  const LocalDims dims{1, 2};
  const auto p = params(2, 0.0, 0.0);
  Mps m = init_product_state(p, Excitation::cavity(), dims, {});
  m.swap_sites(0);
  EXPECT_THROW(step(m, build_gates(build_term_list(p, zero_disorder(2)), dims, 0.01)), Error);
}

TEST(Evolve, ZeroFinalTimeGivesInitialRecord) {
  const LocalDims dims{1, 4};
  const auto p = params(3, 0.5, 0.4);
  Mps m = init_product_state(p, Excitation::on_molecule(1), dims, {});
  const auto s = evolve(m, build_term_list(p, sample_disorder(p, 1)), dims, {0.0, 0.01, 10}, tails_for(dims));
  ASSERT_EQ(s.records.size(), 1u);
  EXPECT_EQ(s.records[0].t, 0.0);
  EXPECT_EQ(s.records[0].n_exc[0], 1.0);
  EXPECT_NEAR(s.records[0].eta_r, 3 * 0.01, 1e-12);
}

TEST(Evolve, ScheduleLandsOnFinalTime) {
  const auto g = resolve_schedule({2 * std::numbers::pi / 0.3, 0.01, 10});
  EXPECT_EQ(g.n_steps, 2095);
  EXPECT_NEAR(g.n_steps * g.dt, 2 * std::numbers::pi / 0.3, 1e-12);
  EXPECT_TRUE(is_record_step(g, 10, 0));
  EXPECT_TRUE(is_record_step(g, 10, 2095));
  EXPECT_FALSE(is_record_step(g, 10, 2094));
  EXPECT_THROW(resolve_schedule({1.0, -0.1, 1}), Error);
  EXPECT_THROW(resolve_schedule({1.0, 0.1, 0}), Error);
}

TEST(Evolve, ObserverFailureFlushesPartialSeries) {
  const LocalDims dims{1, 3};
  const auto p = params(2, 0.0, 0.4);
  Mps m = init_product_state(p, Excitation::cavity(), dims, {});
  std::vector<Observer> obs{[](const ObservableRecord& r, const Mps&) {
    if (r.t > 0.5) throw std::runtime_error("stop");
  }};
  try {
    evolve(m, build_term_list(p, zero_disorder(2)), dims, {2.0, 0.1, 1}, tails_for(dims), obs);
    FAIL();
  } catch (const EvolutionAborted& e) {
    EXPECT_EQ(e.code(), ErrorCode::aborted);
    const auto n = e.partial().records.size();
    EXPECT_GE(n, 6u);
    EXPECT_LE(n, 7u);
  }
}

TEST(Evolve, HalvingTimeStepChangesLittle) {
  const LocalDims dims{1, 6};
  const auto p = params(3, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 2024));
  const double tf = 2094 * 0.01;
  Mps a = init_product_state(p, Excitation::on_molecule(1), dims, {64});
  Mps b = a;
  const auto sa = evolve(a, terms, dims, {tf, 0.01, 10}, tails_for(dims));
  const auto sb = evolve(b, terms, dims, {tf, 0.005, 20}, tails_for(dims));
  EXPECT_LT(max_abs_dev(sa, sb), 1e-4);
}

TEST(Evolve, MatchesExactDiagonalizationSmallSystem) {
  const LocalDims dims{1, 4};
  const auto p = params(2, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 5));
  const auto tails = tails_for(dims);
  for (const auto exc : {Excitation::cavity(), Excitation::on_molecule(2)}) {
    Mps m = init_product_state(p, exc, dims, {64});
    const Schedule sch{2 * std::numbers::pi / 0.3, 0.005, 40};
    const auto tn = evolve(m, terms, dims, sch, tails);
    const auto ed = evolve_exact(terms, DenseBasis(2, 4), exc, sch, tails);
    EXPECT_LT(max_abs_dev(tn, ed), 1e-4);
    for (std::size_t k = 0; k < tn.records.size(); ++k) EXPECT_NEAR(tn.records[k].s_vib, ed.records[k].s_vib, 1e-5);
  }
}

TEST(Evolve, SecondOrderErrorScaling) {
  const LocalDims dims{1, 4};
  const auto p = params(2, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 6));
  const auto tails = tails_for(dims);
  const double tf = 10.0;
  const auto ed = evolve_exact(terms, DenseBasis(2, 4), Excitation::cavity(), {tf, 0.04, 250}, tails);
  std::vector<double> err;
  for (double dt : {0.04, 0.02, 0.01}) {
    Mps m = init_product_state(p, Excitation::cavity(), dims, {64});
    const int every = static_cast<int>(std::lround(10.0 / dt));
    const auto tn = evolve(m, terms, dims, {tf, dt, every}, tails);
    err.push_back(max_abs_dev(tn, evolve_exact(terms, DenseBasis(2, 4), Excitation::cavity(), {tf, dt, every}, tails)));
  }
  (void)ed;
  for (int i = 0; i < 2; ++i) {
    const double ratio = err[i] / err[i + 1];
    EXPECT_GT(ratio, 2.0);
    EXPECT_LT(ratio, 8.0);
  }
}

TEST(Evolve, ReversibleUnderAdjointSteps) {
  const LocalDims dims{1, 4};
  const auto p = params(3, 0.5, 0.4);
  const auto gates = build_gates(build_term_list(p, sample_disorder(p, 7)), dims, 0.05);
  TrotterGateSet back = gates;
  for (auto& g : back.local_half) g = TwoSiteGate(CMatrix(g.matrix().adjoint()));
  for (auto& g : back.local_full) g = TwoSiteGate(CMatrix(g.matrix().adjoint()));
  for (auto& g : back.cavity_half_pe) g = TwoSiteGate(CMatrix(g.matrix().adjoint()));
  for (auto& g : back.cavity_half_ep) g = TwoSiteGate(CMatrix(g.matrix().adjoint()));
  back.cavity_full_last = TwoSiteGate(CMatrix(gates.cavity_full_last.matrix().adjoint()));
  for (int chi : {64, 6}) {
    Mps::Options o;
    o.chi_max = chi;
    const Mps m0 = init_product_state(p, Excitation::cavity(), dims, o);
    Mps m = m0;
    for (int k = 0; k < 40; ++k) step(m, gates);
    for (int k = 0; k < 40; ++k) step(m, back);
    EXPECT_GE(test::fidelity(m.to_dense(), m0.to_dense()), 1.0 - 10 * m.cumulative_truncation() - 1e-10) << chi;
  }
}

TEST(Evolve, FusedStepBoundariesMatchSeparateSteps) {
  const LocalDims dims{1, 4};
  const auto p = params(3, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 5));
  const auto gates = build_gates(terms, dims, 0.05);
  for (const auto& u : gates.local_full) EXPECT_LT(unitarity_error(u.matrix()), 1e-12);
  EXPECT_LT((gates.local_full[1].matrix() - gates.local_half[1].matrix() * gates.local_half[1].matrix()).norm(), 1e-12);

  Mps::Options o;
  o.chi_max = 1 << 20;
  o.svd_cutoff = 0.0;
  Mps plain = init_product_state(p, Excitation::on_molecule(2), dims, o);
  Mps fused = plain;
  for (int k = 0; k < 12; ++k) step(plain, gates);
  for (int k = 0; k < 12; ++k) step(fused, gates, {k > 0, k < 11});
  EXPECT_GT(test::fidelity(plain.to_dense(), fused.to_dense()), 1.0 - 1e-12);

  // evolve fuses between records; the recorded values must not notice
  Mps a = init_product_state(p, Excitation::cavity(), dims, o);
  Mps b = a;
  const auto every = evolve(a, terms, dims, {0.6, 0.05, 1}, tails_for(dims));
  const auto sparse = evolve(b, terms, dims, {0.6, 0.05, 4}, tails_for(dims));
  ASSERT_EQ(sparse.records.size(), 4u);
  for (std::size_t i = 0; i < sparse.records.size(); ++i) {
    const auto& x = sparse.records[i];
    const auto& y = every.records[4 * i];
    EXPECT_NEAR(x.t, y.t, 1e-12);
    EXPECT_NEAR(x.s_vib, y.s_vib, 1e-9);
    EXPECT_NEAR(x.n_ph, y.n_ph, 1e-10);
    EXPECT_NEAR(x.eta_r, y.eta_r, 1e-10);
  }
}

TEST(Evolve, EnergyDriftScalesQuadratically) {
  const LocalDims dims{1, 5};
  const auto p = params(2, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 9));
  std::vector<double> drift;
  for (double dt : {0.1, 0.05}) {
    Mps m = init_product_state(p, Excitation::on_molecule(1), dims, {64});
    const double e0 = energy(m, terms);
    const auto gates = build_gates(terms, dims, dt);
    double worst = 0.0;
    for (int k = 0; k < static_cast<int>(std::lround(10.0 / dt)); ++k) {
      step(m, gates);
      worst = std::max(worst, std::abs(energy(m, terms) - e0));
    }
    drift.push_back(worst);
  }
  EXPECT_LT(drift[0], 0.05);
  EXPECT_GT(drift[0] / drift[1], 2.5);
  EXPECT_LT(drift[0] / drift[1], 6.0);
}

TEST(Energy, MatchesDenseExpectation) {
  const LocalDims dims{1, 3};
  const auto p = params(2, 0.5, 0.4);
  const auto terms = build_term_list(p, sample_disorder(p, 10));
  Mps m = init_product_state(p, Excitation::cavity(), dims, {64});
  const auto gates = build_gates(terms, dims, 0.1);
  for (int k = 0; k < 15; ++k) step(m, gates);
  // dense Hamiltonian in label order (ph, e1, v1, e2, v2)
  const std::vector<int> d{2, 2, 4, 2, 4};
  const CMatrix a = annihilation(1), b = annihilation(3);
  CMatrix sp = CMatrix::Zero(2, 2);
  sp(1, 0) = 1.0;
  const CMatrix ne = sp * sp.adjoint();
  CMatrix h = CMatrix::Zero(128, 128);
  for (int n = 0; n < 2; ++n) {
    const int e = 1 + 2 * n, v = 2 + 2 * n;
    h += terms.onsite_exc[n] * test::embed(d, e, ne);
    h += terms.onsite_vib * test::embed(d, v, b.adjoint() * b);
    h += terms.holstein * test::embed(d, e, ne) * test::embed(d, v, b + b.adjoint());
    h += terms.cavity_coupling * (test::embed(d, 0, a) * test::embed(d, e, sp) +
                                  test::embed(d, 0, a.adjoint()) * test::embed(d, e, sp.adjoint()));
  }
  const CVector psi = m.to_dense();
  EXPECT_NEAR(energy(m, terms), psi.dot(h * psi).real(), 1e-10);
}
