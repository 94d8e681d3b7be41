#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "htc/oracle.hpp"
#include "htc/perturb.hpp"

using namespace htc;

namespace {
const double kPi = std::numbers::pi;
}

TEST(SurvivalTcExact, Limits) {
  for (int n : {1, 2, 7, 100}) EXPECT_NEAR(survival_tc_exact(n, 0.0).value, 1.0, 1e-15);
  for (double t : {0.3, 1.1, 2.5}) EXPECT_NEAR(survival_tc_exact(1, t).value, std::cos(t) * std::cos(t), 1e-14);
  // (N-1)^2/N^2 - 2(N-1)/N^2 + 1/N^2 = 1 - 4/N + 4/N^2
  EXPECT_NEAR(survival_tc_exact(100, kPi).value, 1 - 4.0 / 100 + 4.0 / 10000, 1e-14);
  EXPECT_NEAR(survival_tc_exact(100, kPi).value, 0.9604, 1e-12);
  EXPECT_FALSE(survival_tc_exact(4, 1.0).validity.empty());
}

TEST(SurvivalTcExact, AgreesWithExactDiagonalization) {
  HtcParams p;
  p.n_molecules = 4;
  p.disorder_width = 0.0;
  p.lambda = 0.0;
  p.g_collective = 1.3;
  const auto s = evolve_exact(build_term_list(p, zero_disorder(4)), DenseBasis(4, 0), Excitation::on_molecule(1),
                              {8.0, 0.1, 1}, tail_operator(TailConfig::from_eta0(0.01), 1));
  for (const auto& r : s.records) EXPECT_NEAR(r.n_exc[0], survival_tc_exact(4, r.t, 1.3).value, 1e-10);
}

TEST(DarkWeightInitialMolecule, Values) {
  EXPECT_EQ(dark_weight_initial_molecule(1).value, 0.0);
  EXPECT_NEAR(dark_weight_initial_molecule(100).value, 0.99, 1e-15);
  EXPECT_NEAR(dark_weight_initial_molecule(2).value, 0.5, 1e-15);
}

TEST(DarkPhotonWeightDisorder, Formulae) {
  EXPECT_EQ(dark_photon_weight_disorder(0.0, 100, DisorderLaw::gaussian).value, 0.0);
  EXPECT_NEAR(dark_photon_weight_disorder(0.1, 100, DisorderLaw::gaussian).value, 0.0099, 1e-15);
  EXPECT_NEAR(dark_photon_weight_disorder(0.1, 100, DisorderLaw::box).value, 0.0099 / 12, 1e-15);
  EXPECT_NEAR(dark_photon_weight_disorder(0.3, 1000000, DisorderLaw::gaussian).value, 0.09, 1e-6);
}

TEST(DarkPhotonWeightDisorder, ExpansionImprovesAsWidthShrinks) {
  // the same seeds at every width, so the sampling noise is common to all points and the
  // remaining gap to the per-realization second-order expression is the expansion error
  HtcParams p;
  p.n_molecules = 100;
  p.lambda = 0.0;
  double prev = 1e9;
  for (double w : {0.2, 0.1, 0.05}) {
    p.disorder_width = w;
    double numeric = 0.0, second_order = 0.0;
    for (int k = 0; k < 64; ++k) {
      const auto r = sample_disorder(p, 500 + static_cast<std::uint64_t>(k));
      numeric += dark_photon_weight_numeric(p, r).weight / 64;
      second_order += dark_photon_weight_fourier(r).value / 64;
    }
    const double target = dark_photon_weight_disorder(w, 100, DisorderLaw::gaussian).value;
    EXPECT_NEAR(numeric, target, 0.15 * target) << w;
    const double rel = std::abs(numeric - second_order) / second_order;
    EXPECT_LT(rel, prev) << w;
    prev = rel;
  }
}

TEST(DarkPhotonWeightVibronic, ReducedAndUnreduced) {
  EXPECT_EQ(dark_photon_weight_vibronic(0.0, 0.3).value, 0.0);
  EXPECT_EQ(dark_photon_weight_vibronic_unreduced(0.0, 0.3).value, 0.0);
  const double red = dark_photon_weight_vibronic(0.4, 0.3).value;
  EXPECT_NEAR(red, 0.0072, 1e-12);
  const double unred = dark_photon_weight_vibronic_unreduced(0.4, 0.3).value;
  EXPECT_LT(std::abs(unred - red) / red, 0.3);
}

TEST(TransferScalingEstimate, Scaling) {
  const double t = 2 * kPi / 0.3;
  EXPECT_EQ(transfer_scaling_estimate(0.0, 100, t).value, 0.0);
  const double a = transfer_scaling_estimate(0.5, 100, t).value;
  const double b = transfer_scaling_estimate(0.5, 200, t).value;
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(b, a / 2, 1e-12 * a);
}

TEST(TransferScalingEstimate, WithinFactorThreeOfEnsembleDynamics) {
  // with lambda = 0 the vibrations decouple, so the electro-photonic sector propagates exactly
  const int n = 100;
  const double t = 2 * kPi / 0.3;
  HtcParams p;
  p.n_molecules = n;
  p.lambda = 0.0;
  p.disorder_width = 0.5;
  p.disorder_law = DisorderLaw::box;
  const auto tails = tail_operator(TailConfig::from_eta0(0.01), 1);
  double loss = 0.0;
  const int reps = 32;
  for (int k = 0; k < reps; ++k) {
    const auto terms = build_term_list(p, sample_disorder(p, 100 + k));
    const auto s = evolve_exact(terms, DenseBasis(n, 0), Excitation::on_molecule(1), {t, t / 4, 4}, tails);
    loss += (1.0 - s.records.back().n_exc[0]) / reps;
  }
  const double est = transfer_scaling_estimate(0.5, n, t).value;
  EXPECT_LT(est / loss, 3.0);
  EXPECT_GT(est / loss, 1.0 / 3.0);
}

TEST(NoCavityReference, Values) {
  const auto cfg = TailConfig::from_eta0(0.01);
  const auto r0 = no_cavity_reference(0.4, 0.3, 10, cfg, 0.0);
  EXPECT_EQ(r0.x1, 0.0);
  EXPECT_NEAR(r0.eta_r, 10 * 0.01, 1e-12);
  EXPECT_NEAR(r0.eta_l, 10 * 0.01, 1e-12);
  const auto rh = no_cavity_reference(0.4, 0.3, 10, cfg, kPi / 0.3);
  EXPECT_NEAR(rh.x1, 2 * std::sqrt(2.0) * 0.4, 1e-14);
  EXPECT_NEAR(rh.p1, 0.0, 1e-14);
  EXPECT_NEAR(rh.eta_r, 0.09 + 0.5 * (1 + std::erf(rh.x1 - cfg.x_thr_r)), 1e-14);
}
