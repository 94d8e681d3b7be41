#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "htc/linalg.hpp"
#include "htc/model.hpp"
#include "htc/mps.hpp"
#include "htc/observables.hpp"
#include "htc/tebd.hpp"

namespace htc {

/// Single-excitation electro-photonic states (photon, molecule 1..N) times
/// vibrational Fock configurations. Index = electronic * n_configs + config,
/// where electronic 0 is the photon and electronic n+1 is molecule n.
class DenseBasis {
 public:
  /// max_total_quanta < 0 keeps the full product basis.
  DenseBasis(int n_molecules, int n_max_v, int max_total_quanta = -1);

  int n_molecules() const { return n_molecules_; }
  int n_max_v() const { return n_max_v_; }
  std::size_t n_configs() const { return configs_.size(); }
  std::size_t dim() const { return configs_.size() * static_cast<std::size_t>(n_molecules_ + 1); }
  const std::vector<int>& config(std::size_t c) const { return configs_[c]; }

  /// Index of a configuration, or -1 when it lies outside the basis.
  std::int64_t find(const std::vector<int>& occupations) const;

 private:
  std::int64_t code(const std::vector<int>& occ) const;

  int n_molecules_;
  int n_max_v_;
  std::vector<std::vector<int>> configs_;
  std::unordered_map<std::int64_t, std::int64_t> lookup_;
};

constexpr std::size_t kDenseCap = 20000;

/// Real symmetric Hamiltonian assembled by walking the basis.
RMatrix build_dense_hamiltonian(const HamiltonianTermList& terms, const DenseBasis& basis,
                                std::size_t cap = kDenseCap);

/// Dense total-excitation operator (photon + excitons); diagonal in this basis.
RMatrix dense_charge_operator(const DenseBasis& basis);

CVector dense_initial_state(const DenseBasis& basis, const Excitation& excitation);

struct DensePropagator {
  RVector energies;
  RMatrix vectors;

  explicit DensePropagator(const RMatrix& h);
  CVector propagate(const CVector& psi0, double t) const;
};

/// Fock-basis density matrix of molecule n (0-based) from a dense state.
CMatrix dense_vib_density_matrix(const DenseBasis& basis, const CVector& psi, int molecule);

ObservableRecord dense_measure(const DenseBasis& basis, const CVector& psi, double t, const TailOperator& tails);

/// Exact propagation on the same record grid as the tensor-network run.
ObservableTimeSeries evolve_exact(const HamiltonianTermList& terms, const DenseBasis& basis,
                                  const Excitation& excitation, const Schedule& schedule,
                                  const TailOperator& tails, CVector* final_state = nullptr);

struct DarkWeight {
  double weight = 0.0;
  bool ambiguous = false;  // polaritons not clearly separated by photon weight
};

/// 1 - |<+|1_ph>|^2 - |<-|1_ph>|^2 in the frozen-vibration sector, the two
/// polaritons being the eigenstates with the largest photon weight.
DarkWeight dark_photon_weight_numeric(const HtcParams& params, const DisorderRealization& realization);

/// Electro-photonic (N+1)x(N+1) Hamiltonian with frozen vibrations.
RMatrix electro_photonic_hamiltonian(const HtcParams& params, const DisorderRealization& realization);

}  // namespace htc
