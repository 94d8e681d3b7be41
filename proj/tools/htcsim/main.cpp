#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "htc/config.hpp"
#include "htc/error.hpp"
#include "htc/harness.hpp"
#include "htc/series_io.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_file;
  std::string preset;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string method;
  std::string excitation;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config_file, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("-p,--preset", o.preset, "named preset: full, desk, gate");
  app->add_option("-s,--set", o.overrides, "override, e.g. numerics.chi=64 or model.n_molecules=8");
  app->add_option("-o,--out", o.out_dir, "output directory");
  app->add_option("-m,--method", o.method, "tebd, meanfield or ed");
  app->add_option("-e,--excitation", o.excitation, "cavity or molecule:<i>");
}

htc::RunConfig resolve(const CommonOptions& o) {
  htc::RunConfig c = o.preset.empty() ? htc::RunConfig{} : htc::preset(o.preset);
  if (!o.config_file.empty()) {
    if (o.preset.empty()) {
      c = htc::load_config(o.config_file);
    } else {
      htc::merge_json(c, htc::read_json(o.config_file));
    }
  }
  if (!o.method.empty()) c.method = htc::parse_method(o.method);
  if (!o.excitation.empty()) c.excitation = htc::parse_excitation(o.excitation);
  for (const auto& s : o.overrides) htc::apply_override(c, s);
  if (!o.out_dir.empty()) c.output.dir = o.out_dir;
  c.validate();
  return c;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find(',', pos);
    const auto tok = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !std::isfinite(x))
      throw htc::Error(htc::ErrorCode::invalid_argument, "bad sweep value '" + tok + "'");
    v.push_back(x);
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return v;
}

int fail(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holstein-Tavis-Cummings tensor network simulator"};
  app.require_subcommand(1);

  CommonOptions run_o, ens_o, sweep_o, oracle_o;
  int workers = 0;

  auto* run = app.add_subcommand("run", "single realization");
  add_common(run, run_o);
  int member = 0;
  run->add_option("--member", member, "ensemble member index (seed = base_seed + index)")->check(CLI::NonNegativeNumber);
  bool print_config = false;
  run->add_flag("--print-config", print_config, "print the resolved configuration and exit");

  auto* ens = app.add_subcommand("ensemble", "disorder ensemble with averaging");
  add_common(ens, ens_o);
  ens->add_option("-w,--workers", workers, "parallel workers (default: HTC_WORKERS or 1)");

  auto* sweep = app.add_subcommand("sweep", "parameter or convergence sweep");
  add_common(sweep, sweep_o);
  std::string axis, values;
  sweep->add_option("--axis", axis, "W, lambda, N, chi, dt or n_max_v")->required();
  sweep->add_option("--values", values, "comma separated values")->required();
  sweep->add_option("-w,--workers", workers, "parallel workers (default: HTC_WORKERS or 1)");

  auto* oracle = app.add_subcommand("oracle", "exact diagonalization run, optionally compared with tebd");
  add_common(oracle, oracle_o);
  bool no_compare = false;
  oracle->add_flag("--no-compare", no_compare, "skip the tebd comparison");

  auto* report = app.add_subcommand("report", "plot-data bundle from ensemble directories");
  std::vector<std::string> report_dirs;
  std::string report_out = "htc_report";
  report->add_option("dirs", report_dirs, "ensemble output directories");
  report->add_option("-o,--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("invalid_argument", e.what());
  }

  try {
    if (*run) {
      const auto c = resolve(run_o);
      if (print_config) {
        std::cout << json(c).dump(2) << '\n';
        return 0;
      }
      htc::MemberResult m;
      if (member == 0) {
        m = htc::cli_run(c);
      } else {
        m = htc::simulate(c, member);
        htc::write_member(c, m, c.output.dir, c.output.prefix);
      }
      const auto& f = m.series.records.back();
      std::cout << json{{"output", (std::filesystem::path(c.output.dir) / c.output.prefix).string()},
                        {"seed", m.seed},
                        {"t", f.t},
                        {"s_vib", f.s_vib},
                        {"eta_r", f.eta_r},
                        {"wall_seconds", m.wall_seconds}}
                       .dump()
                << '\n';
    } else if (*ens) {
      const auto c = resolve(ens_o);
      const int k = workers > 0 ? workers : htc::worker_count_from_env();
      const auto r = htc::run_ensemble(c, k, true);
      std::cout << json{{"output", c.output.dir}, {"count", r.members.size()}, {"failures", r.failures.size()}}.dump()
                << '\n';
    } else if (*sweep) {
      const auto c = resolve(sweep_o);
      const int k = workers > 0 ? workers : htc::worker_count_from_env();
      const auto vals = parse_values(values);
      const auto r = htc::run_sweep(c, htc::parse_sweep_axis(axis), vals, k, true);
      int failed = 0;
      for (const auto& p : r.points) failed += p.ok ? 0 : 1;
      std::cout << json{{"output", (std::filesystem::path(c.output.dir) / "sweep_summary.csv").string()},
                        {"points", r.points.size()},
                        {"failed", failed}}
                       .dump()
                << '\n';
    } else if (*oracle) {
      const auto c = resolve(oracle_o);
      const auto r = htc::run_oracle(c, !no_compare, true);
      json out{{"output", c.output.dir}};
      if (!no_compare) out["max_deviation"] = r.max_deviation;
      std::cout << out.dump() << '\n';
    } else if (*report) {
      std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
      htc::build_report(dirs, report_out);
      std::cout << json{{"output", report_out}}.dump() << '\n';
    }
  } catch (const htc::Error& e) {
    return fail(std::string(htc::to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
