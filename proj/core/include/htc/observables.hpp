#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "htc/linalg.hpp"
#include "htc/model.hpp"
#include "htc/mps.hpp"

namespace htc {

/// Observables at one instant. Per-molecule arrays are indexed by molecule
/// (0-based here, 1-based in file headers).
struct ObservableRecord {
  double t = 0.0;
  double s_vib = 0.0;
  double n_ph = 0.0;
  double eta_l = 0.0;
  double eta_r = 0.0;
  double norm = 1.0;
  double trunc = 0.0;
  int max_bond = 1;
  std::vector<double> n_exc, x, p;

  // diagnostics, not part of the tabular output
  double q_mean = 1.0;
  double q_variance = 0.0;
  double reorder_trunc = 0.0;
  double fock_edge = 0.0;  // largest top-Fock-level population over molecules
};

struct ObservableTimeSeries {
  std::string method = "tebd";
  int n_molecules = 0;
  std::vector<ObservableRecord> records;
};

/// Right-tail threshold chosen so the vibrational ground state carries
/// weight eta0 beyond it; the left threshold mirrors it.
struct TailConfig {
  double eta0 = 1e-2;
  double x_thr_r = 0.0;
  double x_thr_l = 0.0;

  static TailConfig from_eta0(double eta0);
  void validate() const;
};

/// T_ab = integral over the tail of phi_a(x) phi_b(x).
struct TailOperator {
  RMatrix right;
  RMatrix left;
};

/// Harmonic-oscillator eigenfunctions phi_0..phi_{d-1} at x (ground state
/// e^{-x^2/2} / pi^{1/4}).
RVector hermite_functions(int d, double x);

/// Integral of phi_a phi_b over (x0, inf), via the Wronskian identity and
/// a three-term recursion on the diagonal.
RMatrix upper_tail_overlaps(int d, double x0);

TailOperator tail_operator(const TailConfig& config, int d);

/// Fock-basis density matrix of molecule `molecule` (1-based).
CMatrix reduced_density_matrix_vib(const Mps& state, int molecule);

/// (eta_l, eta_r) summed over molecules.
std::pair<double, double> tail_weights(std::span<const CMatrix> vib_rdms, const TailOperator& tails);
std::pair<double, double> tail_weights(const Mps& state, const TailOperator& tails);

/// P(x) = sum_ab rho_ab phi_a(x) phi_b(x) on the grid.
std::vector<double> position_distribution(const CMatrix& rho, std::span<const double> grid);
std::vector<double> position_distribution(const Mps& state, int molecule, std::span<const double> grid);

/// Uniform grid helper; the default covers [-5, 8] with 651 points.
std::vector<double> linear_grid(double lo = -5.0, double hi = 8.0, int points = 651);

/// Time-averaged loss of survival of the initially excited degree of freedom
/// over one vibrational period 2 pi / nu (trapezoid, last interval clipped).
double transfer_probability(const ObservableTimeSeries& series, Excitation::Kind which, double nu);

/// (epsilon_n, n_exc[n]) pairs from one record.
std::vector<std::pair<double, double>> excitation_vs_energy(const ObservableRecord& record,
                                                            const DisorderRealization& realization);

/// Flat table view of records: t, s_vib, n_ph, eta_l, eta_r, norm, trunc,
/// max_bond, n_exc_1..N, x_1..N, p_1..N.
std::vector<std::string> column_names(int n_molecules);
std::vector<double> flatten(const ObservableRecord& record);

struct AveragedSeries {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> mean;  // [row][column]
  std::vector<std::vector<double>> stderr_;
  int count = 0;
};

/// Pointwise mean and standard error of the mean over realizations.
AveragedSeries disorder_average(std::span<const ObservableTimeSeries> members);

/// Running integral of a column (trapezoid) on the record grid, e.g. the
/// time-integrated tail weight.
std::vector<double> cumulative_integral(std::span<const double> t, std::span<const double> y);

/// Violated conservation or range properties of a record (empty when all
/// hold): unit norm, single excitation with vanishing variance, entropy within
/// the rank bound log2(chi) (skipped for chi <= 0), tail weights in [0, N].
std::vector<std::string> conservation_violations(const ObservableRecord& record, int chi);

/// Largest absolute difference per observable column (t, norm, trunc and
/// max_bond excluded) between two series on the same grid.
std::vector<std::pair<std::string, double>> series_deviation(const ObservableTimeSeries& a,
                                                             const ObservableTimeSeries& b);

/// Full observable record of an HTC chain state.
ObservableRecord measure(const Mps& state, double t, const TailOperator& tails);

}  // namespace htc
