#include "htc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "htc/error.hpp"

namespace htc {

DenseBasis::DenseBasis(int n_molecules, int n_max_v, int max_total_quanta)
    : n_molecules_(n_molecules), n_max_v_(n_max_v) {
  if (n_molecules < 1 || n_max_v < 0) throw Error(ErrorCode::invalid_argument, "invalid dense basis size");
  std::vector<int> occ(static_cast<std::size_t>(n_molecules), 0);
  // odometer over all occupations, molecule 0 most significant
  while (true) {
    int total = 0;
    for (int o : occ) total += o;
    if (max_total_quanta < 0 || total <= max_total_quanta) {
      lookup_.emplace(code(occ), static_cast<std::int64_t>(configs_.size()));
      configs_.push_back(occ);
    }
    int k = n_molecules - 1;
    while (k >= 0 && occ[static_cast<std::size_t>(k)] == n_max_v) occ[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
    ++occ[static_cast<std::size_t>(k)];
    if (configs_.size() * static_cast<std::size_t>(n_molecules + 1) > 50 * kDenseCap)
      throw Error(ErrorCode::cap_exceeded, "dense basis is far too large");
  }
}

std::int64_t DenseBasis::code(const std::vector<int>& occ) const {
  std::int64_t c = 0;
  for (int o : occ) c = c * (n_max_v_ + 1) + o;
  return c;
}

std::int64_t DenseBasis::find(const std::vector<int>& occ) const {
  for (int o : occ)
    if (o < 0 || o > n_max_v_) return -1;
  const auto it = lookup_.find(code(occ));
  return it == lookup_.end() ? -1 : it->second;
}

RMatrix build_dense_hamiltonian(const HamiltonianTermList& terms, const DenseBasis& basis, std::size_t cap) {
  if (terms.n_molecules() != basis.n_molecules())
    throw Error(ErrorCode::dimension_mismatch, "terms and basis disagree on N");
  const std::size_t dim = basis.dim();
  if (dim > cap) throw Error(ErrorCode::cap_exceeded, "dense dimension " + std::to_string(dim) + " exceeds the cap");
  const auto nc = static_cast<Eigen::Index>(basis.n_configs());
  const int n_mol = basis.n_molecules();
  RMatrix h = RMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < nc; ++c) {
    const auto& occ = basis.config(static_cast<std::size_t>(c));
    double vib = 0.0;
    for (int o : occ) vib += terms.onsite_vib * o;
    h(c, c) += vib;
    for (int n = 0; n < n_mol; ++n) {
      const Eigen::Index row = (n + 1) * nc + c;
      h(row, row) += vib + terms.onsite_exc[static_cast<std::size_t>(n)];
      h(row, c) += terms.cavity_coupling;
      h(c, row) += terms.cavity_coupling;
      // Holstein: raise the mode of the excited molecule (lowering follows by symmetry)
      auto up = occ;
      ++up[static_cast<std::size_t>(n)];
      const auto target = basis.find(up);
      if (target >= 0) {
        const double amp = terms.holstein * std::sqrt(static_cast<double>(up[static_cast<std::size_t>(n)]));
        const Eigen::Index col = (n + 1) * nc + target;
        h(col, row) += amp;
        h(row, col) += amp;
      }
    }
  }
  return h;
}

RMatrix dense_charge_operator(const DenseBasis& basis) {
  return RMatrix::Identity(static_cast<Eigen::Index>(basis.dim()), static_cast<Eigen::Index>(basis.dim()));
}

CVector dense_initial_state(const DenseBasis& basis, const Excitation& excitation) {
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(basis.dim()));
  const auto vac = basis.find(std::vector<int>(static_cast<std::size_t>(basis.n_molecules()), 0));
  Eigen::Index e = 0;
  if (excitation.kind == Excitation::Kind::molecule) {
    if (excitation.molecule < 1 || excitation.molecule > basis.n_molecules())
      throw Error(ErrorCode::invalid_argument, "excited molecule index out of range");
    e = excitation.molecule;
  }
  psi(e * static_cast<Eigen::Index>(basis.n_configs()) + vac) = 1.0;
  return psi;
}

DensePropagator::DensePropagator(const RMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical_failure, "eigendecomposition failed");
  energies = eig.eigenvalues();
  vectors = eig.eigenvectors();
}

CVector DensePropagator::propagate(const CVector& psi0, double t) const {
  CVector coeff = vectors.transpose().cast<cplx>() * psi0;
  for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::exp(cplx(0.0, -energies(k) * t));
  return vectors.cast<cplx>() * coeff;
}

CMatrix dense_vib_density_matrix(const DenseBasis& basis, const CVector& psi, int molecule) {
  const int d = basis.n_max_v() + 1;
  const auto nc = static_cast<Eigen::Index>(basis.n_configs());
  const int ne = basis.n_molecules() + 1;
  CMatrix rho = CMatrix::Zero(d, d);
  for (Eigen::Index c = 0; c < nc; ++c) {
    auto occ = basis.config(static_cast<std::size_t>(c));
    const int a = occ[static_cast<std::size_t>(molecule)];
    for (int b = 0; b < d; ++b) {
      occ[static_cast<std::size_t>(molecule)] = b;
      const auto c2 = basis.find(occ);
      if (c2 < 0) continue;
      cplx acc(0.0);
      for (int e = 0; e < ne; ++e) acc += psi(e * nc + c) * std::conj(psi(e * nc + c2));
      rho(a, b) += acc;
    }
  }
  return rho;
}

ObservableRecord dense_measure(const DenseBasis& basis, const CVector& psi, double t, const TailOperator& tails) {
  const auto nc = static_cast<Eigen::Index>(basis.n_configs());
  const int n_mol = basis.n_molecules();
  const Eigen::Map<const CMatrix> m(psi.data(), nc, n_mol + 1);  // column e, row config
  ObservableRecord r;
  r.t = t;
  const CMatrix rho_ep = m.transpose() * m.conjugate();
  r.s_vib = entropy_bits(CMatrix(rho_ep / rho_ep.trace().real()));
  r.n_ph = m.col(0).squaredNorm();
  const int d = basis.n_max_v() + 1;
  const CMatrix b = annihilation(d - 1);
  const CMatrix xop = (b + b.adjoint()) / std::sqrt(2.0);
  const CMatrix pop = cplx(0.0, -1.0) * (b - b.adjoint()) / std::sqrt(2.0);
  std::vector<CMatrix> vib;
  for (int n = 0; n < n_mol; ++n) {
    r.n_exc.push_back(m.col(n + 1).squaredNorm());
    CMatrix rv = dense_vib_density_matrix(basis, psi, n);
    r.x.push_back((rv * xop).trace().real());
    r.p.push_back((rv * pop).trace().real());
    r.fock_edge = std::max(r.fock_edge, rv(d - 1, d - 1).real());
    vib.push_back(std::move(rv));
  }
  std::tie(r.eta_l, r.eta_r) = tail_weights(vib, tails);
  r.norm = psi.squaredNorm();
  r.q_mean = r.norm;
  r.trunc = 0.0;
  r.max_bond = 0;
  return r;
}

ObservableTimeSeries evolve_exact(const HamiltonianTermList& terms, const DenseBasis& basis,
                                  const Excitation& excitation, const Schedule& schedule,
                                  const TailOperator& tails, CVector* final_state) {
  const StepGrid grid = resolve_schedule(schedule);
  const DensePropagator prop(build_dense_hamiltonian(terms, basis));
  const CVector psi0 = dense_initial_state(basis, excitation);
  ObservableTimeSeries series;
  series.method = "ed";
  series.n_molecules = basis.n_molecules();
  series.records.push_back(dense_measure(basis, psi0, 0.0, tails));
  for (int k = 1; k <= grid.n_steps; ++k) {
    if (!is_record_step(grid, schedule.record_every, k)) continue;
    const double t = k * grid.dt;
    series.records.push_back(dense_measure(basis, prop.propagate(psi0, t), t, tails));
  }
  if (final_state != nullptr) *final_state = prop.propagate(psi0, grid.n_steps * grid.dt);
  return series;
}

RMatrix electro_photonic_hamiltonian(const HtcParams& params, const DisorderRealization& realization) {
  const auto terms = build_term_list(params, realization);
  const int n = terms.n_molecules();
  RMatrix h = RMatrix::Zero(n + 1, n + 1);
  for (int k = 0; k < n; ++k) {
    h(k + 1, k + 1) = terms.onsite_exc[static_cast<std::size_t>(k)];
    h(0, k + 1) = h(k + 1, 0) = terms.cavity_coupling;
  }
  return h;
}

DarkWeight dark_photon_weight_numeric(const HtcParams& params, const DisorderRealization& realization) {
  const RMatrix h = electro_photonic_hamiltonian(params, realization);
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical_failure, "eigendecomposition failed");
  std::vector<double> w(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index k = 0; k < h.rows(); ++k) w[static_cast<std::size_t>(k)] = eig.eigenvectors()(0, k) * eig.eigenvectors()(0, k);
  std::sort(w.begin(), w.end(), std::greater<>());
  DarkWeight out;
  const double bright = w[0] + (w.size() > 1 ? w[1] : 0.0);
  out.weight = std::max(0.0, 1.0 - bright);
  // a third state with photon weight comparable to the second polariton
  out.ambiguous = w.size() > 2 && w[2] > 0.25 * w[1];
  return out;
}

}  // namespace htc
