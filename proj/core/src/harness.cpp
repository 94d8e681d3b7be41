#include "htc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>

#include "htc/error.hpp"
#include "htc/meanfield.hpp"
#include "htc/mps.hpp"
#include "htc/oracle.hpp"
#include "htc/series_io.hpp"
#include "htc/tebd.hpp"

namespace htc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string member_prefix(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%04d", index);
  return buf;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : "; ") + p;
  return s;
}

Observer strict_observer(int chi) {
  return [chi](const ObservableRecord& r, const Mps&) {
    const auto bad = conservation_violations(r, chi);
    if (!bad.empty())
      throw Error(ErrorCode::numerical_failure, "conservation check failed at t=" + format_number(r.t) + ": " + join(bad));
  };
}

void check_records(const ObservableTimeSeries& s, int chi) {
  for (const auto& r : s.records) {
    const auto bad = conservation_violations(r, chi);
    if (!bad.empty())
      throw EvolutionAborted("conservation check failed at t=" + format_number(r.t) + ": " + join(bad), s);
  }
}

void fill_distributions(MemberResult& m, const std::vector<CMatrix>& vib_rdms) {
  m.dist_excited = position_distribution(vib_rdms.front(), m.grid);
  m.dist_mean.assign(m.grid.size(), 0.0);
  for (const auto& rho : vib_rdms) {
    const auto p = position_distribution(rho, m.grid);
    for (std::size_t i = 0; i < p.size(); ++i) m.dist_mean[i] += p[i] / static_cast<double>(vib_rdms.size());
  }
}

}  // namespace

MemberResult simulate(const RunConfig& config, int index) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  MemberResult m;
  m.index = index;
  m.seed = config.ensemble.base_seed + static_cast<std::uint64_t>(index);
  m.realization = sample_disorder(config.model, m.seed);
  const auto terms = build_term_list(config.model, m.realization);
  const auto tails = config.tail();
  const auto dims = config.dims();
  const auto tail_op = tail_operator(tails, dims.vib_dim());
  const Schedule schedule{config.t_final(), config.numerics.dt, config.numerics.record_every};
  const int n_mol = config.model.n_molecules;
  if (config.output.distribution) m.grid = linear_grid();
  json energy_info = json::object();

  switch (config.method) {
    case Method::tebd: {
      Mps state = init_product_state(config.model, config.excitation, dims, config.mps_options());
      const double e0 = energy(state, terms);
      std::vector<Observer> observers;
      if (config.numerics.strict_checks) observers.push_back(strict_observer(config.numerics.chi));
      m.series = evolve(state, terms, dims, schedule, tail_op, observers);
      const double e1 = energy(state, terms);
      energy_info = {{"initial", e0}, {"final", e1}, {"drift", e1 - e0}};
      if (!m.grid.empty()) {
        std::vector<CMatrix> vib;
        const auto rdms = state.site_density_matrices();
        for (int n = 0; n < n_mol; ++n) vib.push_back(rdms[static_cast<std::size_t>(vibration_label(n))]);
        fill_distributions(m, vib);
      }
      break;
    }
    case Method::meanfield: {
      MeanFieldState fin;
      const double e0 = mf_energy(mf_initial_state(n_mol, config.excitation), terms);
      m.series = mf_evolve(terms, config.excitation, schedule, tails, &fin);
      if (config.numerics.strict_checks) check_records(m.series, 0);
      const double e1 = mf_energy(fin, terms);
      energy_info = {{"initial", e0}, {"final", e1}, {"drift", e1 - e0}};
      if (!m.grid.empty()) {
        m.dist_excited = mf_position_distribution(m.series.records.back().x.front(), m.grid);
        m.dist_mean.assign(m.grid.size(), 0.0);
        for (double x : m.series.records.back().x) {
          const auto p = mf_position_distribution(x, m.grid);
          for (std::size_t i = 0; i < p.size(); ++i) m.dist_mean[i] += p[i] / n_mol;
        }
      }
      break;
    }
    case Method::ed: {
      const DenseBasis basis(n_mol, dims.n_max_v);
      CVector fin;
      m.series = evolve_exact(terms, basis, config.excitation, schedule, tail_op, &fin);
      if (config.numerics.strict_checks) check_records(m.series, 0);
      if (!m.grid.empty()) {
        std::vector<CMatrix> vib;
        for (int n = 0; n < n_mol; ++n) vib.push_back(dense_vib_density_matrix(basis, fin, n));
        fill_distributions(m, vib);
      }
      break;
    }
  }

  double reorder = 0.0, fock = 0.0, qvar = 0.0, norm_dev = 0.0;
  for (const auto& r : m.series.records) {
    reorder = std::max(reorder, r.reorder_trunc);
    fock = std::max(fock, r.fock_edge);
    qvar = std::max(qvar, r.q_variance);
    norm_dev = std::max(norm_dev, std::abs(r.norm - 1.0));
  }
  m.diagnostics = {
      {"energy", energy_info},
      {"max_reorder_truncation", reorder},
      {"reorder_alarm", reorder > config.numerics.reorder_alarm},
      {"max_fock_edge_population", fock},
      {"fock_alarm", fock > config.numerics.fock_alarm},
      {"max_excitation_variance", qvar},
      {"max_norm_deviation", norm_dev},
  };
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

json member_metadata(const RunConfig& config, const MemberResult& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = to_string(config.method);
  j["config"] = config;
  j["member_index"] = m.index;
  j["seed"] = m.seed;
  j["realization"] = m.realization;
  j["n_records"] = m.series.records.size();
  j["diagnostics"] = m.diagnostics;
  j["wall_seconds"] = m.wall_seconds;
  if (!m.series.records.empty()) {
    const auto& f = m.series.records.back();
    j["final"] = {{"t", f.t}, {"s_vib", f.s_vib}, {"n_ph", f.n_ph}, {"eta_l", f.eta_l}, {"eta_r", f.eta_r},
                  {"trunc", f.trunc}, {"max_bond", f.max_bond}};
  }
  return j;
}

void write_member(const RunConfig& config, const MemberResult& m, const fs::path& dir, const std::string& prefix) {
  write_series_csv(dir / (prefix + ".csv"), m.series);
  write_json(dir / (prefix + ".json"), member_metadata(config, m));
  if (!m.grid.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < m.grid.size(); ++i)
      rows.push_back({format_number(m.grid[i]), format_number(m.dist_excited[i]), format_number(m.dist_mean[i])});
    write_table_csv(dir / (prefix + "_dist.csv"), {"x", "p_excited", "p_mean"}, rows);
  }
}

MemberResult cli_run(const RunConfig& config) {
  try {
    MemberResult m = simulate(config, 0);
    write_member(config, m, config.output.dir, config.output.prefix);
    return m;
  } catch (const EvolutionAborted& e) {
    MemberResult partial;
    partial.seed = config.ensemble.base_seed;
    partial.realization = sample_disorder(config.model, partial.seed);
    partial.series = e.partial();
    partial.diagnostics = {{"aborted", e.what()}};
    write_member(config, partial, config.output.dir, config.output.prefix);
    throw;
  }
}

int worker_count_from_env() {
  const char* v = std::getenv("HTC_WORKERS");
  if (v == nullptr) return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "HTC_WORKERS must be a positive integer");
  }
}

EnsembleResult run_ensemble(const RunConfig& config, int workers, bool write_files) {
  config.validate();
  const int n = config.ensemble.n_realizations;
  std::vector<std::optional<MemberResult>> slots(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  const bool replicate = config.model.disorder_width == 0.0;

  auto run_one = [&](int i) {
    try {
      slots[static_cast<std::size_t>(i)] = simulate(config, i);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  };

  if (replicate) {
    run_one(0);
    for (int i = 1; i < n; ++i) {
      if (!slots[0]) {
        errors[static_cast<std::size_t>(i)] = errors[0];
        continue;
      }
      MemberResult copy = *slots[0];
      copy.index = i;
      copy.seed = config.ensemble.base_seed + static_cast<std::uint64_t>(i);
      copy.realization = sample_disorder(config.model, copy.seed);
      copy.diagnostics["replicated_from"] = 0;
      slots[static_cast<std::size_t>(i)] = std::move(copy);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i; (i = next.fetch_add(1)) < n;) run_one(i);
    };
    const int k = std::clamp(workers, 1, n);
    std::vector<std::thread> pool;
    for (int t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  EnsembleResult out;
  for (int i = 0; i < n; ++i) {
    if (slots[static_cast<std::size_t>(i)])
      out.members.push_back(std::move(*slots[static_cast<std::size_t>(i)]));
    else
      out.failures.push_back({i, config.ensemble.base_seed + static_cast<std::uint64_t>(i), errors[static_cast<std::size_t>(i)]});
  }
  if (out.members.empty())
    throw Error(ErrorCode::aborted, "all realizations failed; first error: " + out.failures.front().message);

  std::vector<ObservableTimeSeries> series;
  for (const auto& m : out.members) series.push_back(m.series);
  out.average = disorder_average(series);
  const auto& grid = out.members.front().grid;
  if (!grid.empty()) {
    out.dist_excited_mean.assign(grid.size(), 0.0);
    out.dist_mean_mean.assign(grid.size(), 0.0);
    for (const auto& m : out.members)
      for (std::size_t i = 0; i < grid.size(); ++i) {
        out.dist_excited_mean[i] += m.dist_excited[i] / static_cast<double>(out.members.size());
        out.dist_mean_mean[i] += m.dist_mean[i] / static_cast<double>(out.members.size());
      }
  }

  json members = json::array(), failures = json::array();
  double max_reorder = 0.0, max_fock = 0.0;
  for (const auto& m : out.members) {
    members.push_back({{"index", m.index}, {"seed", m.seed}, {"prefix", member_prefix(m.index)}, {"wall_seconds", m.wall_seconds}});
    max_reorder = std::max(max_reorder, m.diagnostics.value("max_reorder_truncation", 0.0));
    max_fock = std::max(max_fock, m.diagnostics.value("max_fock_edge_population", 0.0));
  }
  for (const auto& f : out.failures) failures.push_back({{"index", f.index}, {"seed", f.seed}, {"error", f.message}});
  out.metadata = {
      {"schema_version", kSchemaVersion},
      {"config", config},
      {"n_requested", n},
      {"count", out.members.size()},
      {"members", members},
      {"failures", failures},
      {"replicated", replicate},
      {"alarms",
       {{"max_reorder_truncation", max_reorder},
        {"reorder_alarm", max_reorder > config.numerics.reorder_alarm},
        {"max_fock_edge_population", max_fock},
        {"fock_alarm", max_fock > config.numerics.fock_alarm}}},
  };

  if (write_files) {
    const fs::path dir = config.output.dir;
    for (const auto& m : out.members) write_member(config, m, dir, member_prefix(m.index));
    write_average_csv(dir / "average.csv", out.average);
    if (!grid.empty()) {
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < grid.size(); ++i)
        rows.push_back({format_number(grid[i]), format_number(out.dist_excited_mean[i]), format_number(out.dist_mean_mean[i])});
      write_table_csv(dir / "average_dist.csv", {"x", "p_excited", "p_mean"}, rows);
    }
    write_json(dir / "ensemble.json", out.metadata);
  }
  return out;
}

// -- sweeps -------------------------------------------------------------------

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::W: return "W";
    case SweepAxis::lambda: return "lambda";
    case SweepAxis::N: return "N";
    case SweepAxis::chi: return "chi";
    case SweepAxis::dt: return "dt";
    case SweepAxis::n_max_v: return "n_max_v";
  }
  return "W";
}

SweepAxis parse_sweep_axis(std::string_view t) {
  for (auto a : {SweepAxis::W, SweepAxis::lambda, SweepAxis::N, SweepAxis::chi, SweepAxis::dt, SweepAxis::n_max_v})
    if (t == to_string(a)) return a;
  throw Error(ErrorCode::invalid_argument, "unknown sweep axis '" + std::string(t) + "'");
}

bool is_convergence_axis(SweepAxis a) { return a == SweepAxis::chi || a == SweepAxis::dt || a == SweepAxis::n_max_v; }

RunConfig with_axis_value(const RunConfig& config, SweepAxis axis, double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::invalid_argument, "sweep values must be finite");
  auto as_int = [&] {
    if (value != std::round(value)) throw Error(ErrorCode::invalid_argument, "sweep value must be an integer for this axis");
    return static_cast<int>(value);
  };
  RunConfig c = config;
  switch (axis) {
    case SweepAxis::W: c.model.disorder_width = value; break;
    case SweepAxis::lambda: c.model.lambda = value; break;
    case SweepAxis::N: c.model.n_molecules = as_int(); break;
    case SweepAxis::chi: c.numerics.chi = as_int(); break;
    case SweepAxis::dt: c.numerics.dt = value; break;
    case SweepAxis::n_max_v: c.numerics.n_max_v = as_int(); break;
  }
  c.validate();
  return c;
}

namespace {

std::vector<double> observable_part(const std::vector<double>& flat, const std::vector<std::string>& names) {
  std::vector<double> out;
  for (std::size_t c = 0; c < flat.size(); ++c) {
    const auto& nm = names[c];
    if (nm == "t" || nm == "norm" || nm == "trunc" || nm == "max_bond") continue;
    out.push_back(flat[c]);
  }
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

SweepResult run_sweep(const RunConfig& config, SweepAxis axis, std::span<const double> values, int workers,
                      bool write_files) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "sweep needs at least one value");
  SweepResult res;
  res.axis = axis;
  const fs::path root = config.output.dir;
  // rows of observables (per record) used for successive comparisons
  std::vector<std::vector<double>> prev_rows;
  std::vector<double> prev_times;
  std::vector<std::string> prev_names;
  bool have_prev = false;

  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepPoint pt;
    pt.value = values[i];
    std::vector<std::vector<double>> rows;
    std::vector<double> times;
    std::vector<std::string> names;
    try {
      RunConfig c = with_axis_value(config, axis, values[i]);
      char sub[32];
      std::snprintf(sub, sizeof sub, "point_%02zu", i);
      c.output.dir = (root / sub).string();
      if (is_convergence_axis(axis)) {
        MemberResult m = simulate(c, 0);
        if (write_files) write_member(c, m, c.output.dir, "run");
        const auto& f = m.series.records.back();
        pt.count = 1;
        pt.s_vib = f.s_vib;
        pt.eta_r = f.eta_r;
        names = column_names(m.series.n_molecules);
        for (const auto& r : m.series.records) {
          rows.push_back(observable_part(flatten(r), names));
          times.push_back(r.t);
        }
        pt.series = std::move(m.series);
      } else {
        EnsembleResult e = run_ensemble(c, workers, write_files);
        const auto& last = e.average.mean.back();
        const auto& last_se = e.average.stderr_.back();
        pt.count = e.average.count;
        pt.s_vib = last[1];
        pt.s_vib_se = last_se[1];
        pt.eta_r = last[4];
        pt.eta_r_se = last_se[4];
        names = e.average.columns;
        for (const auto& row : e.average.mean) {
          rows.push_back(observable_part(row, names));
          times.push_back(row[0]);
        }
      }
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    if (pt.ok && have_prev && names == prev_names) {
      pt.delta_final = max_abs_diff(rows.back(), prev_rows.back());
      pt.delta_eta_r_final = std::abs(rows.back()[3] - prev_rows.back()[3]);
      bool same_grid = times.size() == prev_times.size();
      for (std::size_t k = 0; same_grid && k < times.size(); ++k) same_grid = std::abs(times[k] - prev_times[k]) < 1e-9;
      if (same_grid) {
        pt.delta_curve = 0.0;
        pt.delta_s_vib_curve = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          pt.delta_curve = std::max(pt.delta_curve, max_abs_diff(rows[k], prev_rows[k]));
          pt.delta_s_vib_curve = std::max(pt.delta_s_vib_curve, std::abs(rows[k][0] - prev_rows[k][0]));
        }
      }
    }
    if (pt.ok) {
      prev_rows = std::move(rows);
      prev_times = std::move(times);
      prev_names = std::move(names);
      have_prev = true;
    }
    res.points.push_back(std::move(pt));
  }

  if (write_files) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : res.points)
      rows.push_back({std::string(to_string(axis)), format_number(p.value), p.ok ? "ok" : "failed", std::to_string(p.count),
                      format_number(p.s_vib), format_number(p.s_vib_se), format_number(p.eta_r), format_number(p.eta_r_se),
                      format_number(p.delta_curve), format_number(p.delta_final), format_number(p.delta_s_vib_curve),
                      format_number(p.delta_eta_r_final), p.error});
    for (auto& r : rows)
      for (char& ch : r.back())
        if (ch == ',' || ch == '\n') ch = ';';
    write_table_csv(root / "sweep_summary.csv",
                    {"axis", "value", "status", "count", "s_vib", "s_vib_se", "eta_r", "eta_r_se", "delta_curve",
                     "delta_final", "delta_s_vib_curve", "delta_eta_r_final", "error"},
                    rows);
    write_json(root / "sweep.json", {{"schema_version", kSchemaVersion}, {"axis", to_string(axis)},
                                     {"values", std::vector<double>(values.begin(), values.end())}, {"config", config}});
  }
  return res;
}

// -- oracle -------------------------------------------------------------------

OracleComparison run_oracle(const RunConfig& config, bool compare, bool write_files) {
  OracleComparison out;
  RunConfig ed = config;
  ed.method = Method::ed;
  MemberResult exact = simulate(ed, 0);
  if (write_files) write_member(ed, exact, config.output.dir, config.output.prefix + "_ed");
  out.exact = exact.series;
  if (compare) {
    RunConfig tn = config;
    tn.method = Method::tebd;
    MemberResult t = simulate(tn, 0);
    if (write_files) write_member(tn, t, config.output.dir, config.output.prefix + "_tebd");
    out.tebd = t.series;
    out.deviation = series_deviation(out.exact, out.tebd);
    for (const auto& [name, d] : out.deviation) out.max_deviation = std::max(out.max_deviation, d);
    if (write_files) {
      json dev = json::object();
      for (const auto& [name, d] : out.deviation) dev[name] = d;
      write_json(fs::path(config.output.dir) / (config.output.prefix + "_compare.json"),
                 {{"schema_version", kSchemaVersion}, {"max_deviation", out.max_deviation}, {"deviation", dev}});
    }
  }
  return out;
}

// -- report -------------------------------------------------------------------

void build_report(std::span<const fs::path> dirs, const fs::path& out_dir) {
  if (dirs.empty()) throw Error(ErrorCode::invalid_argument, "report needs at least one ensemble directory");
  using Rows = std::vector<std::vector<std::string>>;
  Rows entropy, phase, dist, scatter, tails, scaling;
  for (const auto& dir : dirs) {
    const json ens = read_json(dir / "ensemble.json");
    RunConfig cfg;
    merge_json(cfg, ens.at("config"));
    const std::string label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    const std::string exc = to_string(cfg.excitation);
    const std::string w = format_number(cfg.model.disorder_width);
    const int n = cfg.model.n_molecules;
    const Table avg = read_table_csv(dir / "average.csv");
    const auto c_t = avg.column("t"), c_s = avg.column("s_vib"), c_sse = avg.column("s_vib_se");
    const auto c_el = avg.column("eta_l"), c_er = avg.column("eta_r");
    const auto c_else = avg.column("eta_l_se"), c_erse = avg.column("eta_r_se");
    std::vector<double> t, el, er;
    for (const auto& row : avg.rows) {
      t.push_back(std::stod(row[c_t]));
      el.push_back(std::stod(row[c_el]));
      er.push_back(std::stod(row[c_er]));
    }
    const auto il = cumulative_integral(t, el), ir = cumulative_integral(t, er);
    for (std::size_t k = 0; k < avg.rows.size(); ++k) {
      const auto& row = avg.rows[k];
      entropy.push_back({label, exc, w, row[c_t], row[c_s], row[c_sse]});
      double xm = 0.0, pm = 0.0;
      for (int i = 1; i <= n; ++i) {
        xm += std::stod(row[avg.column("x_" + std::to_string(i))]) / n;
        pm += std::stod(row[avg.column("p_" + std::to_string(i))]) / n;
      }
      phase.push_back({label, exc, w, row[c_t], row[avg.column("x_1")], row[avg.column("p_1")], format_number(xm),
                       format_number(pm)});
      tails.push_back({label, exc, w, row[c_t], row[c_el], row[c_else], row[c_er], row[c_erse], format_number(il[k]),
                       format_number(ir[k])});
    }
    if (fs::exists(dir / "average_dist.csv")) {
      const Table d = read_table_csv(dir / "average_dist.csv");
      for (const auto& row : d.rows) dist.push_back({label, exc, w, row[0], row[1], row[2]});
    }
    for (const auto& mem : ens.at("members")) {
      const auto prefix = mem.at("prefix").get<std::string>();
      const auto seed = mem.at("seed").get<std::uint64_t>();
      const json meta = read_json(dir / (prefix + ".json"));
      const auto stored = meta.at("realization").get<DisorderRealization>();
      const auto replay = sample_disorder(cfg.model, seed);
      if (stored.epsilons != replay.epsilons || stored.seed != seed)
        throw Error(ErrorCode::io_failure, "stored realization of " + prefix + " does not match its seed");
      const auto series = read_series_csv(dir / (prefix + ".csv"));
      const auto& fin = series.records.back();
      for (int i = 0; i < n; ++i)
        scatter.push_back({label, exc, w, std::to_string(mem.at("index").get<int>()), std::to_string(seed),
                           std::to_string(i + 1), format_number(stored.epsilons[static_cast<std::size_t>(i)]),
                           format_number(fin.n_exc[static_cast<std::size_t>(i)])});
      scaling.push_back({label, exc, w, format_number(cfg.model.lambda), std::to_string(n), "member",
                         std::to_string(mem.at("index").get<int>()), format_number(fin.s_vib), format_number(fin.eta_r)});
    }
    const auto& last = avg.rows.back();
    scaling.push_back({label, exc, w, format_number(cfg.model.lambda), std::to_string(n), "mean", "", last[c_s], last[c_er]});
  }
  write_table_csv(out_dir / "fig2_entropy.csv", {"ensemble", "excitation", "W", "t", "s_vib", "s_vib_se"}, entropy);
  write_table_csv(out_dir / "fig2_phasespace.csv", {"ensemble", "excitation", "W", "t", "x_1", "p_1", "x_mean", "p_mean"}, phase);
  write_table_csv(out_dir / "fig2_distribution.csv", {"ensemble", "excitation", "W", "x", "p_excited", "p_mean"}, dist);
  write_table_csv(out_dir / "fig3_scatter.csv",
                  {"ensemble", "excitation", "W", "member", "seed", "molecule", "epsilon", "n_exc"}, scatter);
  write_table_csv(out_dir / "fig4_tails.csv",
                  {"ensemble", "excitation", "W", "t", "eta_l", "eta_l_se", "eta_r", "eta_r_se", "eta_l_integral",
                   "eta_r_integral"},
                  tails);
  write_table_csv(out_dir / "fig5_scaling.csv",
                  {"ensemble", "excitation", "W", "lambda", "N", "kind", "member", "s_vib", "eta_r"}, scaling);
}

}  // namespace htc
