#include "htc/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "htc/error.hpp"
#include "htc/rng.hpp"

namespace htc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::numerical_failure: return "numerical_failure";
    case ErrorCode::cap_exceeded: return "cap_exceeded";
    case ErrorCode::window_too_short: return "window_too_short";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::aborted: return "aborted";
  }
  return "unknown";
}

std::string_view to_string(DisorderLaw law) {
  return law == DisorderLaw::gaussian ? "gaussian" : "box";
}

DisorderLaw parse_disorder_law(std::string_view text) {
  if (text == "gaussian") return DisorderLaw::gaussian;
  if (text == "box") return DisorderLaw::box;
  throw Error(ErrorCode::invalid_argument,
              "unknown disorder law '" + std::string(text) + "'");
}

double HtcParams::single_coupling() const {
  return g_collective / std::sqrt(static_cast<double>(n_molecules));
}

void HtcParams::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invalid_argument, "HtcParams: " + what);
  };
  if (n_molecules < 1) fail("n_molecules must be >= 1");
  if (!(nu > 0.0) || !std::isfinite(nu)) fail("nu must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (!(disorder_width >= 0.0) || !std::isfinite(disorder_width))
    fail("disorder_width must be >= 0");
  if (!(g_collective >= 0.0) || !std::isfinite(g_collective))
    fail("g_collective must be >= 0");
  if (!std::isfinite(delta)) fail("delta must be finite");
}

DisorderRealization sample_disorder(const HtcParams& params, std::uint64_t seed) {
  params.validate();
  DisorderRealization out;
  out.seed = seed;
  out.law = params.disorder_law;
  out.width = params.disorder_width;
  out.epsilons.resize(static_cast<std::size_t>(params.n_molecules));
  SplitMix64 rng(seed);
  const double w = params.disorder_width;
  for (auto& eps : out.epsilons) {
    if (params.disorder_law == DisorderLaw::gaussian) {
      eps = w * rng.normal();
    } else {
      eps = w * (rng.uniform_open() - 0.5);
    }
  }
  return out;
}

DisorderRealization zero_disorder(int n_molecules) {
  DisorderRealization out;
  out.epsilons.assign(static_cast<std::size_t>(n_molecules), 0.0);
  return out;
}

HamiltonianTermList build_term_list(const HtcParams& params,
                                    const DisorderRealization& disorder) {
  params.validate();
  if (static_cast<int>(disorder.epsilons.size()) != params.n_molecules) {
    throw Error(ErrorCode::dimension_mismatch,
                "disorder realization has " + std::to_string(disorder.epsilons.size()) +
                    " offsets but the model has " + std::to_string(params.n_molecules) +
                    " molecules");
  }
  HamiltonianTermList terms;
  terms.onsite_exc.reserve(disorder.epsilons.size());
  for (double eps : disorder.epsilons) {
    if (!std::isfinite(eps)) {
      throw Error(ErrorCode::invalid_argument, "non-finite disorder offset");
    }
    terms.onsite_exc.push_back(params.delta + eps);
  }
  terms.onsite_vib = params.nu;
  terms.holstein = -params.lambda * params.nu;
  terms.cavity_coupling = params.single_coupling();
  return terms;
}

void to_json(nlohmann::json& j, const DisorderRealization& r) {
  j = nlohmann::json{{"seed", r.seed},
                     {"law", to_string(r.law)},
                     {"width", r.width},
                     {"epsilons", r.epsilons}};
}

void from_json(const nlohmann::json& j, DisorderRealization& r) {
  r.seed = j.at("seed").get<std::uint64_t>();
  r.law = parse_disorder_law(j.at("law").get<std::string>());
  r.width = j.at("width").get<double>();
  r.epsilons = j.at("epsilons").get<std::vector<double>>();
}

void to_json(nlohmann::json& j, const HtcParams& p) {
  j = nlohmann::json{{"n_molecules", p.n_molecules},
                     {"g_collective", p.g_collective},
                     {"nu", p.nu},
                     {"lambda", p.lambda},
                     {"delta", p.delta},
                     {"disorder_width", p.disorder_width},
                     {"disorder_law", to_string(p.disorder_law)}};
}

void from_json(const nlohmann::json& j, HtcParams& p) {
  HtcParams d;
  p.n_molecules = j.value("n_molecules", d.n_molecules);
  p.g_collective = j.value("g_collective", d.g_collective);
  p.nu = j.value("nu", d.nu);
  p.lambda = j.value("lambda", d.lambda);
  p.delta = j.value("delta", d.delta);
  p.disorder_width = j.value("disorder_width", d.disorder_width);
  p.disorder_law = parse_disorder_law(
      j.value("disorder_law", std::string(to_string(d.disorder_law))));
}

}  // namespace htc
