#include "htc/tebd.hpp"

#include <cmath>
#include <string>

namespace htc {

namespace {

void check_standard_order(const Mps& state) {
  for (int p = 0; p < state.size(); ++p)
    if (state.label_at(p) != p)
      throw Error(ErrorCode::invalid_argument, "state must be in the standard site order");
  if (state.site(photon_label()).kind != SiteKind::photon)
    throw Error(ErrorCode::invalid_argument, "first site must be the photon");
}

}  // namespace

CMatrix local_generator(const HamiltonianTermList& terms, int molecule, const LocalDims& dims) {
  if (molecule < 0 || molecule >= terms.n_molecules())
    throw Error(ErrorCode::invalid_argument, "molecule index out of range");
  const int dv = dims.vib_dim();
  const CMatrix b = annihilation(dims.n_max_v);
  CMatrix ne = CMatrix::Zero(2, 2);
  ne(1, 1) = 1.0;
  const CMatrix iv = CMatrix::Identity(dv, dv);
  return terms.onsite_exc[static_cast<std::size_t>(molecule)] * kron(ne, iv) +
         terms.onsite_vib * kron(CMatrix::Identity(2, 2), b.adjoint() * b) +
         terms.holstein * kron(ne, b + b.adjoint());
}

CMatrix cavity_generator(double g, const LocalDims& dims, bool photon_first) {
  const CMatrix a = annihilation(dims.n_max_p);
  CMatrix sp = CMatrix::Zero(2, 2);  // sigma^+ : |0> -> |1>
  sp(1, 0) = 1.0;
  const CMatrix h = photon_first ? CMatrix(kron(a, sp) + kron(a.adjoint(), sp.adjoint()))
                                 : CMatrix(kron(sp, a) + kron(sp.adjoint(), a.adjoint()));
  return g * h;
}

TrotterGateSet build_gates(const HamiltonianTermList& terms, const LocalDims& dims, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  auto finite = [](double v) { return std::isfinite(v); };
  bool ok = finite(terms.onsite_vib) && finite(terms.holstein) && finite(terms.cavity_coupling);
  for (double e : terms.onsite_exc) ok = ok && finite(e);
  if (!ok) throw Error(ErrorCode::invalid_argument, "non-finite Hamiltonian coefficient");
  if (terms.n_molecules() < 1) throw Error(ErrorCode::invalid_argument, "need at least one molecule");

  TrotterGateSet g;
  g.dt = dt;
  for (int n = 0; n < terms.n_molecules(); ++n) {
    const CMatrix h = local_generator(terms, n, dims);
    g.local_half.emplace_back(expm_hermitian(h, 0.5 * dt));
    g.local_full.emplace_back(expm_hermitian(h, dt));
  }
  const CMatrix hpe = cavity_generator(terms.cavity_coupling, dims, true);
  const CMatrix hep = cavity_generator(terms.cavity_coupling, dims, false);
  const TwoSiteGate half_pe(expm_hermitian(hpe, 0.5 * dt));
  const TwoSiteGate half_ep(expm_hermitian(hep, 0.5 * dt));
  // all molecules share the same coupling, so the cavity gates are shared too
  g.cavity_half_pe.assign(static_cast<std::size_t>(terms.n_molecules()), half_pe);
  g.cavity_half_ep.assign(static_cast<std::size_t>(terms.n_molecules()), half_ep);
  g.cavity_full_last = TwoSiteGate(expm_hermitian(hpe, dt));
  return g;
}

StepReport step(Mps& state, const TrotterGateSet& gates, StepFusion fusion) {
  const int n_mol = static_cast<int>(gates.local_half.size());
  if (state.size() != 2 * n_mol + 1) throw Error(ErrorCode::dimension_mismatch, "gate set does not match the state");
  check_standard_order(state);
  StepReport rep;
  auto idx = [](int n) { return static_cast<std::size_t>(n); };

  // forward: photon at p = 2n, then exc_n at p+1, vib_n at p+2 (n 0-based)
  if (fusion.merge_trailing_local && gates.local_full.size() != gates.local_half.size())
    throw Error(ErrorCode::invalid_argument, "gate set has no full local gates");
  for (int n = 0; n + 1 < n_mol; ++n) {
    const int p = 2 * n;
    if (!fusion.skip_leading_local)
      rep.truncation_weight += state.apply_two_site_gate(p + 1, gates.local_half[idx(n)], Absorb::left);
    rep.truncation_weight += state.apply_gate_and_swap(p, gates.cavity_half_pe[idx(n)], Absorb::right);
    rep.truncation_weight += state.swap_sites(p + 1, Absorb::right);
  }
  {
    const int n = n_mol - 1;
    const int p = 2 * n;
    rep.truncation_weight += state.apply_two_site_gate(p + 1, gates.local_half[idx(n)], Absorb::left);
    rep.truncation_weight += state.apply_two_site_gate(p, gates.cavity_full_last, Absorb::right);
    rep.truncation_weight += state.apply_two_site_gate(p + 1, gates.local_half[idx(n)], Absorb::left);
  }
  // backward: exc_n at p, vib_n at p+1, photon at p+2
  for (int n = n_mol - 2; n >= 0; --n) {
    const int p = 2 * n;
    rep.truncation_weight += state.swap_sites(p + 1, Absorb::left);
    rep.truncation_weight += state.apply_gate_and_swap(p, gates.cavity_half_ep[idx(n)], Absorb::right);
    const auto& local = fusion.merge_trailing_local ? gates.local_full[idx(n)] : gates.local_half[idx(n)];
    rep.truncation_weight += state.apply_two_site_gate(p + 1, local, Absorb::left);
  }
  rep.max_bond = state.max_bond_dim();
  return rep;
}

double energy(const Mps& state, const HamiltonianTermList& terms) {
  const int n_mol = terms.n_molecules();
  if (state.size() != 2 * n_mol + 1) throw Error(ErrorCode::dimension_mismatch, "terms do not match the state");
  const auto rdms = state.site_density_matrices();
  const int dv = state.site(vibration_label(0)).dim;
  const int dp = state.site(photon_label()).dim;
  const CMatrix b = annihilation(dv - 1);
  const CMatrix a = annihilation(dp - 1);
  CMatrix ne = CMatrix::Zero(2, 2);
  ne(1, 1) = 1.0;
  CMatrix sp = CMatrix::Zero(2, 2);
  sp(1, 0) = 1.0;
  double e = 0.0;
  for (int n = 0; n < n_mol; ++n) {
    const CMatrix& re = rdms[static_cast<std::size_t>(exciton_label(n))];
    const CMatrix& rv = rdms[static_cast<std::size_t>(vibration_label(n))];
    e += terms.onsite_exc[static_cast<std::size_t>(n)] * re(1, 1).real();
    e += terms.onsite_vib * (rv * b.adjoint() * b).trace().real();
    const LocalOperator hol[2] = {{exciton_label(n), ne}, {vibration_label(n), b + b.adjoint()}};
    e += terms.holstein * state.expectation(hol).real();
    const LocalOperator cav[2] = {{photon_label(), a}, {exciton_label(n), sp}};
    e += 2.0 * terms.cavity_coupling * state.expectation(cav).real();
  }
  return e;
}

StepGrid resolve_schedule(const Schedule& s) {
  if (!(s.t_final >= 0.0) || !std::isfinite(s.t_final)) throw Error(ErrorCode::invalid_argument, "t_final must be >= 0");
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (s.record_every < 1) throw Error(ErrorCode::invalid_argument, "record_every must be >= 1");
  StepGrid g;
  g.n_steps = static_cast<int>(std::ceil(s.t_final / s.dt - 1e-9));
  if (g.n_steps < 0) g.n_steps = 0;
  g.dt = g.n_steps > 0 ? s.t_final / g.n_steps : s.dt;
  return g;
}

bool is_record_step(const StepGrid& grid, int record_every, int k) {
  return k % record_every == 0 || k == grid.n_steps;
}

ObservableTimeSeries evolve(Mps& state, const HamiltonianTermList& terms, const LocalDims& dims,
                            const Schedule& schedule, const TailOperator& tails,
                            const std::vector<Observer>& observers) {
  const StepGrid grid = resolve_schedule(schedule);
  ObservableTimeSeries series;
  series.method = "tebd";
  series.n_molecules = terms.n_molecules();
  auto record = [&](double t) {
    series.records.push_back(measure(state, t, tails));
    for (const auto& obs : observers) obs(series.records.back(), state);
  };
  try {
    record(0.0);
    if (grid.n_steps == 0) return series;
    const TrotterGateSet gates = build_gates(terms, dims, grid.dt);
    bool carried = false;
    for (int k = 1; k <= grid.n_steps; ++k) {
      const bool observed = is_record_step(grid, schedule.record_every, k);
      step(state, gates, {carried, !observed});
      carried = !observed;
      if (observed) record(k * grid.dt);
    }
  } catch (const EvolutionAborted&) {
    throw;
  } catch (const std::exception& e) {
    throw EvolutionAborted(e.what(), std::move(series));
  }
  return series;
}

}  // namespace htc
