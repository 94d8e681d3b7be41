#pragma once

#include <span>
#include <vector>

#include "htc/model.hpp"
#include "htc/mps.hpp"
#include "htc/observables.hpp"
#include "htc/tebd.hpp"

namespace htc {

/// Product of a single-excitation electro-photonic state and one coherent
/// state per vibrational mode.
struct MeanFieldState {
  cplx c_ph{0.0, 0.0};
  std::vector<cplx> c;
  std::vector<cplx> alpha;

  double norm_squared() const;
};

MeanFieldState mf_initial_state(int n_molecules, const Excitation& excitation);

/// Time derivative of the time-dependent Hartree equations.
MeanFieldState mf_derivative(const MeanFieldState& s, const HamiltonianTermList& terms);

/// One classic fourth-order Runge-Kutta step.
void mf_rk4_step(MeanFieldState& s, const HamiltonianTermList& terms, double h);

/// Energy of the product state (coherent-state expectation of H).
double mf_energy(const MeanFieldState& s, const HamiltonianTermList& terms);

ObservableRecord mf_measure(const MeanFieldState& s, double t, const TailConfig& tails);

/// Gaussian (variance 1/2) centered at x0 on the grid.
std::vector<double> mf_position_distribution(double x0, std::span<const double> grid);

/// Same schedule conventions as the tensor-network evolution; the
/// integrator substeps at dt/10.
ObservableTimeSeries mf_evolve(const HamiltonianTermList& terms, const Excitation& excitation,
                               const Schedule& schedule, const TailConfig& tails,
                               MeanFieldState* final_state = nullptr);

}  // namespace htc
