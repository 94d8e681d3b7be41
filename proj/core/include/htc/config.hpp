#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "htc/linalg.hpp"
#include "htc/model.hpp"
#include "htc/mps.hpp"
#include "htc/observables.hpp"

namespace htc {

constexpr int kSchemaVersion = 1;

enum class Method { tebd, meanfield, ed };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);
std::string_view to_string(Factorization f);
Factorization parse_factorization(std::string_view text);

/// "cavity" or "molecule:<index>".
Excitation parse_excitation(std::string_view text);

struct NumericsConfig {
  int chi = 128;
  double svd_cutoff = 1e-12;
  Factorization factorization = Factorization::svd;
  double dt = 0.01;
  double t_final = -1.0;  // negative: one vibrational period 2 pi / nu
  int n_max_v = 10;
  int n_max_p = 1;
  int record_every = 10;
  double reorder_alarm = 1e-6;
  double fock_alarm = 1e-4;
  bool strict_checks = true;  // abort a run on a conservation violation
};

struct EnsembleConfig {
  int n_realizations = 64;
  std::uint64_t base_seed = 1;
};

struct OutputConfig {
  std::string dir = "htc_out";
  std::string prefix = "run";
  bool distribution = true;
};

struct RunConfig {
  HtcParams model;
  Method method = Method::tebd;
  Excitation excitation = Excitation::on_molecule(1);
  NumericsConfig numerics;
  EnsembleConfig ensemble;
  double eta0 = 1e-2;
  OutputConfig output;
  std::string preset = "full";

  double t_final() const;
  TailConfig tail() const;
  LocalDims dims() const;
  Mps::Options mps_options() const;
  /// Throws Error(invalid_argument) on any inconsistent setting.
  void validate() const;
};

/// Named presets: "full" (headline parameters), "desk" (N = 16, chi = 64, dt = 0.05),
/// "gate" (N = 3 reference configuration for the exact-diagonalization check).
RunConfig preset(std::string_view name);

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep the values already present in `c`.
void merge_json(RunConfig& c, const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path);

/// Apply "section.key=value" (value parsed as JSON, falling back to a string).
void apply_override(RunConfig& c, std::string_view assignment);

}  // namespace htc
