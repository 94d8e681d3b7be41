#include "htc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "htc/error.hpp"

namespace htc {

using nlohmann::json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::tebd: return "tebd";
    case Method::meanfield: return "meanfield";
    case Method::ed: return "ed";
  }
  return "tebd";
}

Method parse_method(std::string_view t) {
  if (t == "tebd") return Method::tebd;
  if (t == "meanfield") return Method::meanfield;
  if (t == "ed") return Method::ed;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(t) + "'");
}

std::string_view to_string(Factorization f) { return f == Factorization::svd ? "svd" : "density_matrix"; }

Factorization parse_factorization(std::string_view t) {
  if (t == "svd") return Factorization::svd;
  if (t == "density_matrix") return Factorization::density_matrix;
  throw Error(ErrorCode::invalid_argument, "unknown factorization '" + std::string(t) + "'");
}

Excitation parse_excitation(std::string_view t) {
  if (t == "cavity") return Excitation::cavity();
  constexpr std::string_view prefix = "molecule";
  if (t.substr(0, prefix.size()) == prefix) {
    if (t.size() == prefix.size()) return Excitation::on_molecule(1);
    if (t[prefix.size()] == ':') {
      try {
        return Excitation::on_molecule(std::stoi(std::string(t.substr(prefix.size() + 1))));
      } catch (const std::exception&) {
      }
    }
  }
  throw Error(ErrorCode::invalid_argument, "excitation must be 'cavity' or 'molecule:<index>'");
}

double RunConfig::t_final() const {
  return numerics.t_final < 0.0 ? 2.0 * M_PI / model.nu : numerics.t_final;
}

TailConfig RunConfig::tail() const { return TailConfig::from_eta0(eta0); }

LocalDims RunConfig::dims() const { return {numerics.n_max_p, numerics.n_max_v}; }

Mps::Options RunConfig::mps_options() const {
  Mps::Options o;
  o.chi_max = numerics.chi;
  o.svd_cutoff = numerics.svd_cutoff;
  o.factorization = numerics.factorization;
  o.reorder_alarm = numerics.reorder_alarm;
  return o;
}

void RunConfig::validate() const {
  model.validate();
  auto fail = [](const char* m) { throw Error(ErrorCode::invalid_argument, m); };
  if (numerics.chi < 1) fail("chi must be >= 1");
  if (!(numerics.svd_cutoff >= 0.0)) fail("svd_cutoff must be >= 0");
  if (!(numerics.dt > 0.0) || !std::isfinite(numerics.dt)) fail("dt must be positive");
  if (!std::isfinite(numerics.t_final)) fail("t_final must be finite");
  if (numerics.n_max_v < 0) fail("n_max_v must be >= 0");
  if (numerics.n_max_p < 1) fail("n_max_p must be >= 1");
  if (numerics.record_every < 1) fail("record_every must be >= 1");
  if (ensemble.n_realizations < 1) fail("n_realizations must be >= 1");
  if (!(eta0 > 0.0 && eta0 < 0.5)) fail("eta0 must lie in (0, 0.5)");
  if (excitation.kind == Excitation::Kind::molecule &&
      (excitation.molecule < 1 || excitation.molecule > model.n_molecules))
    fail("excited molecule index out of range");
  if (output.prefix.empty()) fail("output prefix must not be empty");
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  if (name == "full") return c;
  if (name == "desk") {
    c.model.n_molecules = 16;
    c.numerics.chi = 64;
    c.numerics.factorization = Factorization::density_matrix;
    c.numerics.dt = 0.05;
    c.numerics.record_every = 10;
    c.ensemble.n_realizations = 32;
    return c;
  }
  if (name == "gate") {
    c.model.n_molecules = 3;
    c.numerics.chi = 64;
    c.numerics.n_max_v = 6;
    c.numerics.dt = 0.005;
    c.numerics.record_every = 20;
    c.ensemble.n_realizations = 1;
    c.ensemble.base_seed = 2024;
    return c;
  }
  throw Error(ErrorCode::invalid_argument, "unknown preset '" + std::string(name) + "'");
}

void to_json(json& j, const RunConfig& c) {
  j = json{
      {"schema_version", kSchemaVersion},
      {"preset", c.preset},
      {"model", c.model},
      {"method", to_string(c.method)},
      {"excitation", to_string(c.excitation)},
      {"numerics",
       {{"chi", c.numerics.chi},
        {"svd_cutoff", c.numerics.svd_cutoff},
        {"factorization", to_string(c.numerics.factorization)},
        {"dt", c.numerics.dt},
        {"t_final", c.t_final()},
        {"n_max_v", c.numerics.n_max_v},
        {"n_max_p", c.numerics.n_max_p},
        {"record_every", c.numerics.record_every},
        {"reorder_alarm", c.numerics.reorder_alarm},
        {"fock_alarm", c.numerics.fock_alarm},
        {"strict_checks", c.numerics.strict_checks}}},
      {"ensemble", {{"n_realizations", c.ensemble.n_realizations}, {"base_seed", c.ensemble.base_seed}}},
      {"tail", {{"eta0", c.eta0}, {"x_thr_r", c.tail().x_thr_r}, {"x_thr_l", c.tail().x_thr_l}}},
      {"output", {{"dir", c.output.dir}, {"prefix", c.output.prefix}, {"distribution", c.output.distribution}}},
  };
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_argument, where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw Error(ErrorCode::invalid_argument, "unknown configuration key '" + where + key + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void merge_json(RunConfig& c, const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "configuration must be a JSON object");
    reject_unknown(j, {"schema_version", "preset", "model", "method", "excitation", "numerics", "ensemble", "tail", "output"}, "");
    if (j.contains("model")) {
      std::vector<std::string> keys;
      const json current = c.model;
      for (const auto& [k, _] : current.items()) keys.push_back(k);
      if (!j.at("model").is_object()) throw Error(ErrorCode::invalid_argument, "model must be a JSON object");
      for (const auto& [k, _] : j.at("model").items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
          throw Error(ErrorCode::invalid_argument, "unknown configuration key 'model." + k + "'");
    }
    if (j.contains("preset")) {
      const auto name = j.at("preset").get<std::string>();
      if (name != c.preset) c = preset(name);
    }
    if (j.contains("model")) {
      json m = c.model;
      m.update(j.at("model"));
      c.model = m.get<HtcParams>();
    }
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("excitation")) c.excitation = parse_excitation(j.at("excitation").get<std::string>());
    if (j.contains("numerics")) {
      const auto& n = j.at("numerics");
      reject_unknown(n, {"chi", "svd_cutoff", "factorization", "dt", "t_final", "n_max_v", "n_max_p", "record_every",
                         "reorder_alarm", "fock_alarm", "strict_checks"}, "numerics.");
      take(n, "chi", c.numerics.chi);
      take(n, "svd_cutoff", c.numerics.svd_cutoff);
      if (n.contains("factorization")) c.numerics.factorization = parse_factorization(n.at("factorization").get<std::string>());
      take(n, "dt", c.numerics.dt);
      take(n, "t_final", c.numerics.t_final);
      take(n, "n_max_v", c.numerics.n_max_v);
      take(n, "n_max_p", c.numerics.n_max_p);
      take(n, "record_every", c.numerics.record_every);
      take(n, "reorder_alarm", c.numerics.reorder_alarm);
      take(n, "fock_alarm", c.numerics.fock_alarm);
      take(n, "strict_checks", c.numerics.strict_checks);
    }
    if (j.contains("ensemble")) {
      reject_unknown(j.at("ensemble"), {"n_realizations", "base_seed"}, "ensemble.");
      take(j.at("ensemble"), "n_realizations", c.ensemble.n_realizations);
      take(j.at("ensemble"), "base_seed", c.ensemble.base_seed);
    }
    if (j.contains("tail")) reject_unknown(j.at("tail"), {"eta0", "x_thr_r", "x_thr_l"}, "tail.");
    if (j.contains("tail")) take(j.at("tail"), "eta0", c.eta0);
    if (j.contains("output")) {
      reject_unknown(j.at("output"), {"dir", "prefix", "distribution"}, "output.");
      take(j.at("output"), "dir", c.output.dir);
      take(j.at("output"), "prefix", c.output.prefix);
      take(j.at("output"), "distribution", c.output.distribution);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad configuration value: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, "config is not valid JSON: " + std::string(e.what()));
  }
  RunConfig c = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : RunConfig{};
  merge_json(c, j);
  return c;
}

void apply_override(RunConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorCode::invalid_argument, "override must look like section.key=value");
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json patch = value;
  std::string rest = path;
  std::vector<std::string> keys;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
    keys.push_back(rest.substr(0, pos));
  keys.push_back(rest);
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) patch = json{{*it, patch}};
  merge_json(c, patch);
}

}  // namespace htc
