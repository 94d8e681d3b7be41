#pragma once

#include <string>

#include "htc/model.hpp"
#include "htc/observables.hpp"

namespace htc {

/// A closed-form estimate and the regime in which it holds.
struct PerturbationReport {
  std::string label;
  double value = 0.0;
  std::string validity;
};

/// Survival of the initially excited molecule for lambda = W = 0.
PerturbationReport survival_tc_exact(int n_molecules, double t, double g_c = 1.0);

/// Dark-state weight of a single-molecule excitation: 1 - 1/N.
PerturbationReport dark_weight_initial_molecule(int n_molecules);

/// Disorder-averaged photon weight in the dark manifold, second order in W.
PerturbationReport dark_photon_weight_disorder(double width, int n_molecules, DisorderLaw law,
                                               double g_c = 1.0);

/// Same quantity for one realization: sum over k != 0 of |eps_k|^2 / g_c^2
/// with eps_k the discrete Fourier amplitudes of the offsets.
PerturbationReport dark_photon_weight_fourier(const DisorderRealization& realization, double g_c = 1.0);

/// Vibronic photon leakage into the dark manifold, lambda^2 nu^2 / (2 g_c^2).
PerturbationReport dark_photon_weight_vibronic(double lambda, double nu, double g_c = 1.0);

/// Two-term form before the nu << g_c reduction, averaged over the two
/// polariton branches.
PerturbationReport dark_photon_weight_vibronic_unreduced(double lambda, double nu, double g_c = 1.0);

/// Order-of-magnitude loss 1 - <sigma_1^+ sigma_1^-> from dephasing against
/// the dark manifold for box disorder:
///   W t / (6 N) * integral of (1 - cos D) / D^2 over [(-W/2 - eps1) t, (W/2 - eps1) t].
PerturbationReport transfer_scaling_estimate(double width, int n_molecules, double t, double epsilon1 = 0.0);

struct NoCavityReference {
  double x1 = 0.0;
  double p1 = 0.0;
  double eta_l = 0.0;
  double eta_r = 0.0;
};

/// Exact decoupled (g = 0) dynamics of a molecule excited at t = 0; the
/// other N - 1 oscillators stay in their ground state.
NoCavityReference no_cavity_reference(double lambda, double nu, int n_molecules, const TailConfig& tails,
                                      double t);

}  // namespace htc
