// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on stderr.
// Optional argument: comma separated list of criteria to run (default all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "htc/config.hpp"
#include "htc/harness.hpp"
#include "htc/meanfield.hpp"
#include "htc/oracle.hpp"
#include "htc/perturb.hpp"
#include "htc/series_io.hpp"
#include "htc/tebd.hpp"

using namespace htc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const double kPeriod = 2 * std::numbers::pi / 0.3;

// every series produced here is audited for the conservation invariants
struct Audit {
  long records = 0;
  long runs = 0;
  std::vector<std::string> failures;
  void add(const ObservableTimeSeries& s, int chi, const std::string& what) {
    ++runs;
    for (const auto& r : s.records) {
      ++records;
      for (const auto& v : conservation_violations(r, chi))
        if (failures.size() < 10) failures.push_back(what + " t=" + format_number(r.t) + ": " + v);
    }
  }
} audit;

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

void progress(const std::string& s) { std::cerr << "[acceptance] " << s << std::endl; }

int workers() { return worker_count_from_env(); }

// desk-scale ensembles are shared between criteria 6 and 7
std::map<std::string, EnsembleResult> desk_cache;

RunConfig desk(double w, Excitation e) {
  RunConfig c = preset("desk");
  c.model.disorder_width = w;
  c.excitation = e;
  c.output.distribution = false;
  return c;
}

const EnsembleResult& desk_ensemble(double w, Excitation e, int n) {
  const std::string key = to_string(e) + "/" + fmt(w) + "/" + std::to_string(n);
  auto it = desk_cache.find(key);
  if (it != desk_cache.end()) return it->second;
  RunConfig c = desk(w, e);
  c.ensemble.n_realizations = n;
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_ensemble(c, workers(), false);
  progress("ensemble " + key + " done in " +
           fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s, " +
           std::to_string(r.failures.size()) + " failures");
  for (const auto& m : r.members) audit.add(m.series, c.numerics.chi, "desk " + key);
  return desk_cache.emplace(key, std::move(r)).first->second;
}

double mean_final_s_vib(const EnsembleResult& e, int first_n) {
  double s = 0.0;
  int n = 0;
  for (const auto& m : e.members) {
    if (m.index >= first_n) continue;
    s += m.series.records.back().s_vib;
    ++n;
  }
  return n > 0 ? s / n : std::nan("");
}

Outcome criterion1() {
  double worst = 0.0;
  std::string detail;
  for (auto e : {Excitation::on_molecule(1), Excitation::cavity()}) {
    RunConfig c = preset("gate");
    c.model.disorder_width = 0.5;
    c.excitation = e;
    const auto r = run_oracle(c, true, false);
    audit.add(r.tebd, c.numerics.chi, "gate tebd");
    audit.add(r.exact, 0, "gate ed");
    worst = std::max(worst, r.max_deviation);
    detail += to_string(e) + " max deviation " + fmt(r.max_deviation) + "; ";
  }
  return {worst < 1e-4, detail + "tolerance 1e-4"};
}

Outcome criterion2() {
  double worst = 0.0;
  std::string detail;
  for (int n : {1, 4, 100}) {
    RunConfig c;
    c.model.n_molecules = n;
    c.model.lambda = 0.0;
    c.model.disorder_width = 0.0;
    c.numerics.chi = 16;
    c.numerics.dt = 0.01;
    c.output.distribution = false;
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = simulate(c, 0);
    audit.add(m.series, c.numerics.chi, "tc N=" + std::to_string(n));
    double dev = 0.0;
    for (const auto& r : m.series.records) dev = std::max(dev, std::abs(r.n_exc[0] - survival_tc_exact(n, r.t).value));
    worst = std::max(worst, dev);
    detail += "N=" + std::to_string(n) + " " + fmt(dev) + "; ";
    progress("tc N=" + std::to_string(n) + " " +
             fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
  }
  if (worst >= 1e-5) {
    // diagnostic only: show that the miss is the dt^2 splitting error of the sweep
    RunConfig c;
    c.model.n_molecules = 4;
    c.model.lambda = 0.0;
    c.model.disorder_width = 0.0;
    c.numerics.chi = 16;
    c.numerics.dt = 0.005;
    c.output.distribution = false;
    const auto m = simulate(c, 0);
    double dev = 0.0;
    for (const auto& r : m.series.records) dev = std::max(dev, std::abs(r.n_exc[0] - survival_tc_exact(4, r.t).value));
    detail += "(N=4 at dt=0.005: " + fmt(dev) + ") ";
  }
  return {worst < 1e-5, "max survival deviation over [0, 2pi/nu] " + detail + "tolerance 1e-5"};
}

Outcome criterion3() {
  RunConfig c;
  c.model.n_molecules = 4;
  c.model.g_collective = 0.0;
  c.model.lambda = 0.4;
  c.model.disorder_width = 0.5;
  c.numerics.record_every = 5;
  c.output.distribution = false;
  const auto m = simulate(c, 0);
  audit.add(m.series, c.numerics.chi, "decoupled");
  double dev = 0.0;
  for (const auto& r : m.series.records) {
    const auto ref = no_cavity_reference(0.4, 0.3, 4, c.tail(), r.t);
    dev = std::max({dev, std::abs(r.x[0] - ref.x1), std::abs(r.p[0] - ref.p1), std::abs(r.eta_l - ref.eta_l),
                    std::abs(r.eta_r - ref.eta_r)});
  }
  return {dev < 1e-4, "max deviation of x1, p1, eta_l, eta_r " + fmt(dev) + ", tolerance 1e-4"};
}

Outcome criterion4() {
  std::string detail = std::to_string(audit.runs) + " runs, " + std::to_string(audit.records) + " records audited";
  for (const auto& f : audit.failures) detail += "; " + f;
  return {audit.failures.empty() && audit.runs > 0, detail};
}

Outcome criterion5() {
  HtcParams p;
  p.n_molecules = 100;
  p.disorder_width = 0.1;
  p.lambda = 0.0;
  double mean = 0.0;
  int ambiguous = 0;
  for (int k = 0; k < 64; ++k) {
    const auto d = dark_photon_weight_numeric(p, sample_disorder(p, 1 + static_cast<std::uint64_t>(k)));
    mean += d.weight / 64;
    ambiguous += d.ambiguous ? 1 : 0;
  }
  const double target = dark_photon_weight_disorder(0.1, 100, DisorderLaw::gaussian).value;
  const double rel = std::abs(mean - target) / target;
  return {rel < 0.15 && ambiguous == 0, "mean dark photon weight " + fmt(mean) + " vs " + fmt(target) + " (rel " +
                                            fmt(rel) + ", tolerance 0.15, ambiguous " + std::to_string(ambiguous) + ")"};
}

Outcome criterion6() {
  bool pass = true;
  std::string detail;
  for (auto e : {Excitation::on_molecule(1), Excitation::cavity()}) {
    std::vector<double> s;
    for (double w : {0.0, 0.25, 0.5}) {
      // the cavity W = 0.5 ensemble is shared with criterion 7 (first 32 members are identical)
      const int n = (e.kind == Excitation::Kind::cavity && w == 0.5) ? 64 : 32;
      s.push_back(mean_final_s_vib(desk_ensemble(w, e, n), 32));
    }
    const bool ok = s[2] >= 2.0 * s[0] && s[0] < s[1] && s[1] < s[2];
    pass = pass && ok;
    detail += to_string(e) + " S_vib(W=0,0.25,0.5) = " + fmt(s[0]) + ", " + fmt(s[1]) + ", " + fmt(s[2]) + " ratio " +
              fmt(s[2] / s[0]) + "; ";
  }
  return {pass, detail + "need ratio >= 2 and monotone"};
}

Outcome criterion7() {
  const auto& e = desk_ensemble(0.5, Excitation::cavity(), 64);
  // bins of width 0.25 centred on multiples of 0.25
  std::map<int, std::pair<double, int>> bins;
  for (const auto& m : e.members) {
    const auto pairs = excitation_vs_energy(m.series.records.back(), m.realization);
    for (const auto& [eps, n] : pairs) {
      auto& b = bins[static_cast<int>(std::lround(eps / 0.25))];
      b.first += n;
      ++b.second;
    }
  }
  auto mean = [&](int k) { return bins.count(k) && bins[k].second > 0 ? bins[k].first / bins[k].second : 0.0; };
  // maxima on each side, over bins with enough samples
  const int min_count = 10;
  int best_pos = 0, best_neg = 0;
  for (const auto& [k, b] : bins) {
    if (b.second < min_count) continue;
    if (k > 0 && (best_pos == 0 || mean(k) > mean(best_pos))) best_pos = k;
    if (k < 0 && (best_neg == 0 || mean(k) > mean(best_neg))) best_neg = k;
  }
  const bool near = std::abs(best_pos - 4) <= 1 && std::abs(best_neg + 4) <= 1;
  const bool above_zero = best_pos != 0 && best_neg != 0 && mean(best_pos) > mean(0) && mean(best_neg) > mean(0);
  std::string table;
  for (const auto& [k, b] : bins)
    if (b.second >= min_count) table += fmt(k * 0.25) + ":" + fmt(mean(k)) + "(" + std::to_string(b.second) + ") ";
  return {near && above_zero, "peaks at eps = " + fmt(best_neg * 0.25) + " and " + fmt(best_pos * 0.25) +
                                  ", n_exc(0) = " + fmt(mean(0)) + "; bins " + table};
}

Outcome criterion8() {
  bool pass = true;
  std::string detail;
  for (auto e : {Excitation::on_molecule(1), Excitation::cavity()}) {
    RunConfig c = preset("desk");
    c.model.n_molecules = 8;
    c.model.disorder_width = 0.5;
    c.excitation = e;
    c.output.distribution = false;
    const auto tn = simulate(c, 0);
    c.method = Method::meanfield;
    const auto mf = simulate(c, 0);
    audit.add(tn.series, c.numerics.chi, "mf-sep tebd");
    audit.add(mf.series, 0, "mf-sep meanfield");
    bool zero = true;
    for (const auto& r : mf.series.records) zero = zero && r.s_vib == 0.0;
    const double gap = std::abs(tn.series.records.back().eta_r - mf.series.records.back().eta_r);
    const bool ok = zero && gap > 5 * 1e-4;
    pass = pass && ok;
    detail += to_string(e) + " |eta_r(tebd) - eta_r(mf)| = " + fmt(gap) + (zero ? "" : ", mean-field entropy nonzero") + "; ";
  }
  return {pass, detail + "need > 5e-4 and S_vib == 0"};
}

Outcome criterion9() {
  std::string detail;
  // bond dimension: successive entropy curves approach each other
  RunConfig c = preset("desk");
  c.model.n_molecules = 8;
  c.model.disorder_width = 0.5;
  c.excitation = Excitation::cavity();
  c.output.distribution = false;
  const std::vector<double> chis{32, 64, 128};
  const auto rc = run_sweep(c, SweepAxis::chi, chis, 1, false);
  for (const auto& p : rc.points) audit.add(p.series, static_cast<int>(p.value), "chi sweep");
  const bool chi_ok = rc.points[1].ok && rc.points[2].ok && rc.points[1].delta_s_vib_curve > rc.points[2].delta_s_vib_curve;
  detail += "chi: dS(32,64) = " + fmt(rc.points[1].delta_s_vib_curve) + ", dS(64,128) = " +
            fmt(rc.points[2].delta_s_vib_curve) + "; ";

  // time step: differences shrink as dt^2
  RunConfig d;
  d.model.n_molecules = 4;
  d.model.disorder_width = 0.5;
  d.numerics.chi = 64;
  d.output.distribution = false;
  const std::vector<double> dts{0.04, 0.02, 0.01};
  const auto rd = run_sweep(d, SweepAxis::dt, dts, 1, false);
  for (const auto& p : rd.points) audit.add(p.series, 64, "dt sweep");
  const double ratio = rd.points[1].delta_final / rd.points[2].delta_final;
  const bool dt_ok = rd.points[1].ok && rd.points[2].ok && ratio > 2.0 && ratio < 8.0;
  detail += "dt: d(0.04,0.02) = " + fmt(rd.points[1].delta_final) + ", d(0.02,0.01) = " + fmt(rd.points[2].delta_final) +
            " ratio " + fmt(ratio) + "; ";

  // vibrational cutoff: tail weight settles
  const std::vector<double> cuts{6, 8, 10};
  const auto rn = run_sweep(d, SweepAxis::n_max_v, cuts, 1, false);
  for (const auto& p : rn.points) audit.add(p.series, 64, "n_max_v sweep");
  double eta_curve = 0.0;
  const auto& a = rn.points[1].series.records;
  const auto& b = rn.points[2].series.records;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) eta_curve = std::max(eta_curve, std::abs(a[k].eta_r - b[k].eta_r));
  const bool n_ok = rn.points[1].ok && rn.points[2].ok && a.size() == b.size() && eta_curve < 1e-4;
  detail += "n_max_v: max |eta_r(8) - eta_r(10)| = " + fmt(eta_curve) + ", |eta_r(6) - eta_r(8)| final = " +
            fmt(rn.points[1].delta_eta_r_final);
  return {chi_ok && dt_ok && n_ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
  }
  const std::vector<std::pair<int, std::function<Outcome()>>> suite{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {5, criterion5}, {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {4, criterion4}};
  std::map<int, Outcome> results;
  for (const auto& [id, fn] : suite) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results[id].detail += " [" + fmt(secs) + " s]";
    progress("criterion " + std::to_string(id) + (results[id].pass ? " PASS " : " FAIL ") + results[id].detail);
  }
  bool all = true;
  for (const auto& [id, o] : results) {
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
