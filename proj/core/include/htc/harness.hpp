#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htc/config.hpp"
#include "htc/model.hpp"
#include "htc/observables.hpp"

namespace htc {

/// One trajectory together with what is needed to persist and replay it.
struct MemberResult {
  int index = 0;
  std::uint64_t seed = 0;
  DisorderRealization realization;
  ObservableTimeSeries series;
  std::vector<double> grid;          // position grid for the final-time distributions
  std::vector<double> dist_excited;  // P_1(x)
  std::vector<double> dist_mean;     // P(x) averaged over molecules
  nlohmann::json diagnostics;
  double wall_seconds = 0.0;
};

/// Simulate ensemble member `index` (seed = base_seed + index) without
/// touching the file system. Throws on failure; an aborted evolution is
/// rethrown as EvolutionAborted carrying the partial series.
MemberResult simulate(const RunConfig& config, int index);

nlohmann::json member_metadata(const RunConfig& config, const MemberResult& m);

/// <dir>/<prefix>.csv, <prefix>.json and <prefix>_dist.csv.
void write_member(const RunConfig& config, const MemberResult& m, const std::filesystem::path& dir,
                  const std::string& prefix);

/// `run`: member 0 written under output.dir/output.prefix. Partial results of
/// an aborted evolution are flushed before the error propagates.
MemberResult cli_run(const RunConfig& config);

struct MemberFailure {
  int index;
  std::uint64_t seed;
  std::string message;
};

struct EnsembleResult {
  std::vector<MemberResult> members;  // successful members, by index
  std::vector<MemberFailure> failures;
  AveragedSeries average;
  std::vector<double> dist_excited_mean;
  std::vector<double> dist_mean_mean;
  nlohmann::json metadata;
};

/// Worker count from HTC_WORKERS (default 1).
int worker_count_from_env();

/// `ensemble`: n_realizations members on `workers` threads, then the
/// disorder average. Results do not depend on the worker count. With W = 0
/// every member is identical, so one trajectory is computed and replicated.
EnsembleResult run_ensemble(const RunConfig& config, int workers, bool write_files);

enum class SweepAxis { W, lambda, N, chi, dt, n_max_v };
std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view text);
/// Convergence axes run a single member; physical axes run ensembles.
bool is_convergence_axis(SweepAxis a);
RunConfig with_axis_value(const RunConfig& config, SweepAxis axis, double value);

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  int count = 0;
  double s_vib = 0.0, s_vib_se = 0.0;
  double eta_r = 0.0, eta_r_se = 0.0;
  /// Against the previous point: largest difference of any observable over
  /// the whole record grid (same grid only) and at the final time.
  double delta_curve = std::numeric_limits<double>::quiet_NaN();
  double delta_final = std::numeric_limits<double>::quiet_NaN();
  double delta_s_vib_curve = std::numeric_limits<double>::quiet_NaN();
  double delta_eta_r_final = std::numeric_limits<double>::quiet_NaN();
  ObservableTimeSeries series;  // convergence axes only
};

struct SweepResult {
  SweepAxis axis = SweepAxis::W;
  std::vector<SweepPoint> points;
};

/// `sweep`: S_vib and eta_r at the final time (one vibrational period by
/// default) per value, written to output.dir/sweep_summary.csv.
SweepResult run_sweep(const RunConfig& config, SweepAxis axis, std::span<const double> values, int workers,
                      bool write_files);

struct OracleComparison {
  ObservableTimeSeries exact;
  ObservableTimeSeries tebd;
  std::vector<std::pair<std::string, double>> deviation;
  double max_deviation = 0.0;
};

/// `oracle`: exact diagonalization of the configured system, optionally
/// compared with the tensor-network run on the same grid.
OracleComparison run_oracle(const RunConfig& config, bool compare, bool write_files);

/// `report`: tidy plot-data tables from ensemble directories.
void build_report(std::span<const std::filesystem::path> ensemble_dirs, const std::filesystem::path& out_dir);

}  // namespace htc
