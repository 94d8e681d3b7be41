#include "htc/meanfield.hpp"

#include <cmath>

#include "htc/error.hpp"

namespace htc {

double MeanFieldState::norm_squared() const {
  double s = std::norm(c_ph);
  for (const auto& v : c) s += std::norm(v);
  return s;
}

MeanFieldState mf_initial_state(int n_molecules, const Excitation& excitation) {
  if (n_molecules < 1) throw Error(ErrorCode::invalid_argument, "need at least one molecule");
  MeanFieldState s;
  s.c.assign(static_cast<std::size_t>(n_molecules), cplx(0.0));
  s.alpha.assign(static_cast<std::size_t>(n_molecules), cplx(0.0));
  if (excitation.kind == Excitation::Kind::cavity) {
    s.c_ph = 1.0;
  } else {
    if (excitation.molecule < 1 || excitation.molecule > n_molecules)
      throw Error(ErrorCode::invalid_argument, "excited molecule index out of range");
    s.c[static_cast<std::size_t>(excitation.molecule - 1)] = 1.0;
  }
  return s;
}

MeanFieldState mf_derivative(const MeanFieldState& s, const HamiltonianTermList& terms) {
  const cplx mi(0.0, -1.0);
  const double g = terms.cavity_coupling;
  MeanFieldState d;
  d.c.resize(s.c.size());
  d.alpha.resize(s.alpha.size());
  cplx sum(0.0);
  for (const auto& v : s.c) sum += v;
  d.c_ph = mi * g * sum;
  for (std::size_t n = 0; n < s.c.size(); ++n) {
    const double shift = terms.holstein * 2.0 * s.alpha[n].real();  // -lambda nu (alpha + alpha*)
    d.c[n] = mi * ((terms.onsite_exc[n] + shift) * s.c[n] + g * s.c_ph);
    d.alpha[n] = mi * (terms.onsite_vib * s.alpha[n] + terms.holstein * std::norm(s.c[n]));
  }
  return d;
}

namespace {

MeanFieldState axpy(const MeanFieldState& x, double h, const MeanFieldState& k) {
  MeanFieldState y = x;
  y.c_ph += h * k.c_ph;
  for (std::size_t n = 0; n < y.c.size(); ++n) {
    y.c[n] += h * k.c[n];
    y.alpha[n] += h * k.alpha[n];
  }
  return y;
}

}  // namespace

void mf_rk4_step(MeanFieldState& s, const HamiltonianTermList& terms, double h) {
  const auto k1 = mf_derivative(s, terms);
  const auto k2 = mf_derivative(axpy(s, 0.5 * h, k1), terms);
  const auto k3 = mf_derivative(axpy(s, 0.5 * h, k2), terms);
  const auto k4 = mf_derivative(axpy(s, h, k3), terms);
  s.c_ph += h / 6.0 * (k1.c_ph + 2.0 * k2.c_ph + 2.0 * k3.c_ph + k4.c_ph);
  for (std::size_t n = 0; n < s.c.size(); ++n) {
    s.c[n] += h / 6.0 * (k1.c[n] + 2.0 * k2.c[n] + 2.0 * k3.c[n] + k4.c[n]);
    s.alpha[n] += h / 6.0 * (k1.alpha[n] + 2.0 * k2.alpha[n] + 2.0 * k3.alpha[n] + k4.alpha[n]);
  }
}

double mf_energy(const MeanFieldState& s, const HamiltonianTermList& terms) {
  double e = 0.0;
  for (std::size_t n = 0; n < s.c.size(); ++n) {
    const double pop = std::norm(s.c[n]);
    e += terms.onsite_exc[n] * pop + terms.onsite_vib * std::norm(s.alpha[n]) +
         terms.holstein * 2.0 * s.alpha[n].real() * pop +
         2.0 * terms.cavity_coupling * (std::conj(s.c_ph) * s.c[n]).real();
  }
  return e;
}

ObservableRecord mf_measure(const MeanFieldState& s, double t, const TailConfig& tails) {
  ObservableRecord r;
  r.t = t;
  r.s_vib = 0.0;
  r.n_ph = std::norm(s.c_ph);
  for (std::size_t n = 0; n < s.c.size(); ++n) {
    const double x = std::sqrt(2.0) * s.alpha[n].real();
    r.n_exc.push_back(std::norm(s.c[n]));
    r.x.push_back(x);
    r.p.push_back(std::sqrt(2.0) * s.alpha[n].imag());
    r.eta_r += 0.5 * std::erfc(tails.x_thr_r - x);
    r.eta_l += 0.5 * std::erfc(x - tails.x_thr_l);
  }
  r.norm = s.norm_squared();
  r.q_mean = r.norm;
  r.trunc = 0.0;
  r.max_bond = 1;
  return r;
}

std::vector<double> mf_position_distribution(double x0, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(std::exp(-(x - x0) * (x - x0)) / std::sqrt(M_PI));
  return out;
}

ObservableTimeSeries mf_evolve(const HamiltonianTermList& terms, const Excitation& excitation,
                               const Schedule& schedule, const TailConfig& tails, MeanFieldState* final_state) {
  tails.validate();
  const StepGrid grid = resolve_schedule(schedule);
  MeanFieldState s = mf_initial_state(terms.n_molecules(), excitation);
  ObservableTimeSeries series;
  series.method = "meanfield";
  series.n_molecules = terms.n_molecules();
  series.records.push_back(mf_measure(s, 0.0, tails));
  const double h = grid.dt / 10.0;
  for (int k = 1; k <= grid.n_steps; ++k) {
    for (int sub = 0; sub < 10; ++sub) mf_rk4_step(s, terms, h);
    if (!std::isfinite(s.norm_squared()))
      throw EvolutionAborted("mean-field integration produced non-finite values", std::move(series));
    if (is_record_step(grid, schedule.record_every, k)) series.records.push_back(mf_measure(s, k * grid.dt, tails));
  }
  if (final_state != nullptr) *final_state = s;
  return series;
}

}  // namespace htc
