#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace htc {

enum class DisorderLaw { gaussian, box };

std::string_view to_string(DisorderLaw law);
DisorderLaw parse_disorder_law(std::string_view text);

/// Physical parameters of the disordered Holstein-Tavis-Cummings model.
/// Energies are in units of the collective coupling g_c, times in 1/g_c.
struct HtcParams {
  int n_molecules = 100;
  double g_collective = 1.0;
  double nu = 0.3;
  double lambda = 0.4;
  double delta = 0.0;
  double disorder_width = 0.5;
  DisorderLaw disorder_law = DisorderLaw::gaussian;

  /// Single-molecule coupling g_c / sqrt(N).
  double single_coupling() const;

  /// Throws Error(invalid_argument) if any invariant is violated.
  void validate() const;
};

/// Per-molecule electronic energy offsets of one disorder draw.
struct DisorderRealization {
  std::vector<double> epsilons;
  std::uint64_t seed = 0;
  DisorderLaw law = DisorderLaw::gaussian;
  double width = 0.0;
};

/// Coefficients of every Hamiltonian term, ready for gate construction.
struct HamiltonianTermList {
  std::vector<double> onsite_exc;  // delta + epsilon_n
  double onsite_vib = 0.0;         // nu
  double holstein = 0.0;           // -lambda * nu
  double cavity_coupling = 0.0;    // g_c / sqrt(N)

  int n_molecules() const { return static_cast<int>(onsite_exc.size()); }
};

/// Gaussian: mean 0, variance W^2. Box: uniform on (-W/2, W/2).
DisorderRealization sample_disorder(const HtcParams& params, std::uint64_t seed);

/// A realization with all offsets zero (used for W = 0 and tests).
DisorderRealization zero_disorder(int n_molecules);

HamiltonianTermList build_term_list(const HtcParams& params,
                                    const DisorderRealization& disorder);

void to_json(nlohmann::json& j, const DisorderRealization& r);
void from_json(const nlohmann::json& j, DisorderRealization& r);
void to_json(nlohmann::json& j, const HtcParams& p);
void from_json(const nlohmann::json& j, HtcParams& p);

}  // namespace htc
