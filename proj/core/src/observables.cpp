#include "htc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/special_functions/erf.hpp>

#include "htc/error.hpp"

namespace htc {

TailConfig TailConfig::from_eta0(double eta0) {
  if (!(eta0 > 0.0 && eta0 < 0.5)) throw Error(ErrorCode::invalid_argument, "eta0 must lie in (0, 0.5)");
  TailConfig c;
  c.eta0 = eta0;
  c.x_thr_r = boost::math::erf_inv(1.0 - 2.0 * eta0);
  c.x_thr_l = -c.x_thr_r;
  return c;
}

void TailConfig::validate() const {
  if (!(eta0 > 0.0 && eta0 < 0.5) || !std::isfinite(x_thr_r) || !std::isfinite(x_thr_l))
    throw Error(ErrorCode::invalid_argument, "invalid tail configuration");
}

RVector hermite_functions(int d, double x) {
  RVector phi = RVector::Zero(std::max(d, 1));
  phi(0) = std::exp(-0.5 * x * x) / std::pow(M_PI, 0.25);
  if (d > 1) phi(1) = std::sqrt(2.0) * x * phi(0);
  for (int n = 1; n + 1 < d; ++n)
    phi(n + 1) = (std::sqrt(2.0) * x * phi(n) - std::sqrt(static_cast<double>(n)) * phi(n - 1)) /
                 std::sqrt(static_cast<double>(n + 1));
  return phi.head(d);
}

RMatrix upper_tail_overlaps(int d, double x0) {
  if (d < 1) throw Error(ErrorCode::invalid_argument, "dimension must be positive");
  const RVector phi = hermite_functions(d + 2, x0);
  RVector dphi(d + 1);
  for (int n = 0; n <= d; ++n)
    dphi(n) = (n > 0 ? std::sqrt(0.5 * n) * phi(n - 1) : 0.0) - std::sqrt(0.5 * (n + 1)) * phi(n + 1);
  // off-diagonal entries up to index d (needed by the diagonal recursion)
  RMatrix big = RMatrix::Zero(d + 1, d + 1);
  for (int a = 0; a <= d; ++a)
    for (int b = 0; b < a; ++b) {
      const double v = (phi(b) * dphi(a) - phi(a) * dphi(b)) / (2.0 * (a - b));
      big(a, b) = big(b, a) = v;
    }
  big(0, 0) = 0.5 * std::erfc(x0);
  for (int a = 0; a + 1 < d; ++a) {
    const double sa = std::sqrt(static_cast<double>(a));
    const double prev = a > 0 ? sa * big(a - 1, a + 1) : 0.0;
    big(a + 1, a + 1) =
        (std::sqrt(a + 1.0) * big(a, a) + std::sqrt(a + 2.0) * big(a, a + 2) - prev) / std::sqrt(a + 1.0);
  }
  return big.topLeftCorner(d, d);
}

TailOperator tail_operator(const TailConfig& config, int d) {
  config.validate();
  TailOperator t;
  t.right = upper_tail_overlaps(d, config.x_thr_r);
  t.left = RMatrix::Identity(d, d) - upper_tail_overlaps(d, config.x_thr_l);
  return t;
}

CMatrix reduced_density_matrix_vib(const Mps& state, int molecule) {
  const int n_mol = (state.size() - 1) / 2;
  if (molecule < 1 || molecule > n_mol) throw Error(ErrorCode::invalid_argument, "molecule index out of range");
  return state.site_density_matrix(vibration_label(molecule - 1));
}

namespace {

double trace_real(const CMatrix& rho, const RMatrix& op) {
  return (rho.real().array() * op.transpose().array()).sum();
}

}  // namespace

std::pair<double, double> tail_weights(std::span<const CMatrix> vib_rdms, const TailOperator& tails) {
  double l = 0.0, r = 0.0;
  for (const auto& rho : vib_rdms) {
    if (rho.rows() != tails.right.rows())
      throw Error(ErrorCode::dimension_mismatch, "tail operator does not match the vibrational cutoff");
    l += trace_real(rho, tails.left);
    r += trace_real(rho, tails.right);
  }
  return {l, r};
}

std::pair<double, double> tail_weights(const Mps& state, const TailOperator& tails) {
  const auto rdms = state.site_density_matrices();
  std::vector<CMatrix> vib;
  for (int l = 0; l < state.size(); ++l)
    if (state.site(l).kind == SiteKind::vibration) vib.push_back(rdms[static_cast<std::size_t>(l)]);
  return tail_weights(vib, tails);
}

std::vector<double> position_distribution(const CMatrix& rho, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  const RMatrix re = rho.real();
  for (double x : grid) {
    const RVector phi = hermite_functions(static_cast<int>(rho.rows()), x);
    out.push_back(phi.dot(re * phi));
  }
  return out;
}

std::vector<double> position_distribution(const Mps& state, int molecule, std::span<const double> grid) {
  return position_distribution(reduced_density_matrix_vib(state, molecule), grid);
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw Error(ErrorCode::invalid_argument, "invalid grid");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

double transfer_probability(const ObservableTimeSeries& series, Excitation::Kind which, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::invalid_argument, "nu must be positive");
  const double period = 2.0 * M_PI / nu;
  const auto& rec = series.records;
  if (rec.size() < 2 || rec.back().t < period * (1.0 - 1e-9))
    throw Error(ErrorCode::window_too_short, "series does not cover one vibrational period");
  auto loss = [&](const ObservableRecord& r) {
    if (which == Excitation::Kind::cavity) return 1.0 - r.n_ph;
    if (r.n_exc.empty()) throw Error(ErrorCode::invalid_argument, "record has no molecules");
    return 1.0 - r.n_exc[0];
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    const double t0 = rec[i].t, t1 = rec[i + 1].t;
    if (t0 >= period) break;
    const double y0 = loss(rec[i]), y1 = loss(rec[i + 1]);
    if (t1 <= period) {
      acc += 0.5 * (t1 - t0) * (y0 + y1);
    } else {
      const double ye = y0 + (y1 - y0) * (period - t0) / (t1 - t0);
      acc += 0.5 * (period - t0) * (y0 + ye);
    }
  }
  return acc / period;
}

std::vector<std::pair<double, double>> excitation_vs_energy(const ObservableRecord& record,
                                                            const DisorderRealization& realization) {
  if (record.n_exc.size() != realization.epsilons.size())
    throw Error(ErrorCode::dimension_mismatch, "record and realization disagree on N");
  std::vector<std::pair<double, double>> out;
  for (std::size_t n = 0; n < record.n_exc.size(); ++n) out.emplace_back(realization.epsilons[n], record.n_exc[n]);
  return out;
}

std::vector<std::string> column_names(int n_molecules) {
  std::vector<std::string> c{"t", "s_vib", "n_ph", "eta_l", "eta_r", "norm", "trunc", "max_bond"};
  for (const char* prefix : {"n_exc_", "x_", "p_"})
    for (int n = 1; n <= n_molecules; ++n) c.push_back(prefix + std::to_string(n));
  return c;
}

std::vector<double> flatten(const ObservableRecord& r) {
  std::vector<double> v{r.t, r.s_vib, r.n_ph, r.eta_l, r.eta_r, r.norm, r.trunc, static_cast<double>(r.max_bond)};
  v.insert(v.end(), r.n_exc.begin(), r.n_exc.end());
  v.insert(v.end(), r.x.begin(), r.x.end());
  v.insert(v.end(), r.p.begin(), r.p.end());
  return v;
}

AveragedSeries disorder_average(std::span<const ObservableTimeSeries> members) {
  if (members.empty()) throw Error(ErrorCode::invalid_argument, "nothing to average");
  const auto& ref = members.front();
  for (const auto& m : members) {
    bool same = m.n_molecules == ref.n_molecules && m.records.size() == ref.records.size();
    for (std::size_t i = 0; same && i < m.records.size(); ++i)
      same = std::abs(m.records[i].t - ref.records[i].t) <= 1e-12 * std::max(1.0, std::abs(ref.records[i].t));
    if (!same) throw Error(ErrorCode::grid_mismatch, "ensemble members have different time grids");
  }
  AveragedSeries out;
  out.columns = column_names(ref.n_molecules);
  out.count = static_cast<int>(members.size());
  const double k = static_cast<double>(members.size());
  for (std::size_t i = 0; i < ref.records.size(); ++i) {
    std::vector<double> sum(out.columns.size(), 0.0), sq(out.columns.size(), 0.0);
    for (const auto& m : members) {
      const auto v = flatten(m.records[i]);
      for (std::size_t c = 0; c < v.size(); ++c) sum[c] += v[c];
    }
    for (auto& s : sum) s /= k;
    for (const auto& m : members) {
      const auto v = flatten(m.records[i]);
      for (std::size_t c = 0; c < v.size(); ++c) sq[c] += (v[c] - sum[c]) * (v[c] - sum[c]);
    }
    std::vector<double> se(sq.size(), 0.0);
    if (members.size() > 1)
      for (std::size_t c = 0; c < sq.size(); ++c) se[c] = std::sqrt(sq[c] / (k - 1.0) / k);
    out.mean.push_back(std::move(sum));
    out.stderr_.push_back(std::move(se));
  }
  return out;
}

std::vector<double> cumulative_integral(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw Error(ErrorCode::dimension_mismatch, "length mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

std::vector<std::string> conservation_violations(const ObservableRecord& r, int chi) {
  std::vector<std::string> out;
  auto fmt = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return std::string(b);
  };
  const double n = static_cast<double>(r.n_exc.size());
  if (std::abs(r.norm - 1.0) > 1e-8) out.push_back("norm deviates from 1 by " + fmt(r.norm - 1.0));
  if (std::abs(r.q_mean - 1.0) > 1e-8) out.push_back("excitation number deviates from 1 by " + fmt(r.q_mean - 1.0));
  if (r.q_variance > 1e-10) out.push_back("excitation number variance " + fmt(r.q_variance));
  double pop = r.n_ph;
  for (double v : r.n_exc) pop += v;
  if (std::abs(pop - 1.0) > 1e-8) out.push_back("populations sum to 1 + " + fmt(pop - 1.0));
  if (chi > 0 && r.s_vib > std::log2(static_cast<double>(chi)) + 1e-9) out.push_back("S_vib above log2(chi)");
  if (r.s_vib < -1e-12) out.push_back("negative S_vib");
  for (double eta : {r.eta_l, r.eta_r})
    if (eta < -1e-10 || eta > n + 1e-10) out.push_back("tail weight outside [0, N]: " + fmt(eta));
  return out;
}

std::vector<std::pair<std::string, double>> series_deviation(const ObservableTimeSeries& a,
                                                             const ObservableTimeSeries& b) {
  if (a.n_molecules != b.n_molecules || a.records.size() != b.records.size())
    throw Error(ErrorCode::grid_mismatch, "series differ in shape");
  const auto names = column_names(a.n_molecules);
  std::vector<double> dev(names.size(), 0.0);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (std::abs(a.records[i].t - b.records[i].t) > 1e-9) throw Error(ErrorCode::grid_mismatch, "series differ in time grid");
    const auto va = flatten(a.records[i]), vb = flatten(b.records[i]);
    for (std::size_t c = 0; c < va.size(); ++c) dev[c] = std::max(dev[c], std::abs(va[c] - vb[c]));
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& nm = names[c];
    if (nm == "t" || nm == "norm" || nm == "trunc" || nm == "max_bond") continue;
    out.emplace_back(nm, dev[c]);
  }
  return out;
}

ObservableRecord measure(const Mps& state, double t, const TailOperator& tails) {
  const int n_mol = (state.size() - 1) / 2;
  const auto rdms = state.site_density_matrices();
  ObservableRecord r;
  r.t = t;
  const CMatrix& rph = rdms[photon_label()];
  r.n_ph = 0.0;
  for (Eigen::Index s = 0; s < rph.rows(); ++s) r.n_ph += static_cast<double>(s) * rph(s, s).real();
  const int d = state.site(vibration_label(0)).dim;
  const CMatrix b = annihilation(d - 1);
  const CMatrix xop = (b + b.adjoint()) / std::sqrt(2.0);
  const CMatrix pop = cplx(0.0, -1.0) * (b - b.adjoint()) / std::sqrt(2.0);
  std::vector<CMatrix> vib;
  for (int n = 0; n < n_mol; ++n) {
    const CMatrix& re = rdms[static_cast<std::size_t>(exciton_label(n))];
    const CMatrix& rv = rdms[static_cast<std::size_t>(vibration_label(n))];
    r.n_exc.push_back(re(1, 1).real());
    r.x.push_back((rv * xop).trace().real());
    r.p.push_back((rv * pop).trace().real());
    r.fock_edge = std::max(r.fock_edge, rv(d - 1, d - 1).real());
    vib.push_back(rv);
  }
  std::tie(r.eta_l, r.eta_r) = tail_weights(vib, tails);
  const auto block = state.vib_block_entropy();
  r.s_vib = block.entropy_bits;
  r.reorder_trunc = block.reorder_truncation;
  r.norm = state.norm_squared();
  r.trunc = state.cumulative_truncation();
  r.max_bond = state.max_bond_dim();
  const auto q = state.charge_moments();
  r.q_mean = q.mean;
  r.q_variance = q.variance;
  return r;
}

}  // namespace htc
