#include "opertail/config.hpp"

#include <fstream>
#include <sstream>

#include "opertail/error.hpp"

namespace opertail {
namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const std::string& field) {
  if (!j.is_object()) throw ConfigError("field '" + field + "': expected an object");
  if (!j.contains(key)) throw ConfigError("field '" + field + "." + key + "' is missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError("field '" + field + "': expected a number, got " + j.dump());
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("field '" + field + "': expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

json to_json(const RVSpec& v) { return {{"c", v.c}, {"rho", v.rho}, {"gamma", v.gamma}}; }

RVSpec rv_spec_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError("field '" + field + "': expected {\"c\",\"rho\",\"gamma\"}");
  const double c = j.contains("c") ? number(j.at("c"), field + ".c") : 1.0;
  const double rho = number(require(j, "rho", field), field + ".rho");
  const double gamma = j.contains("gamma") ? number(j.at("gamma"), field + ".gamma") : 0.0;
  try {
    return {c, rho, gamma};
  } catch (const DomainError& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

json to_json(const DiagExponent& e) { return {{"eigenvalues", e.eigenvalues()}}; }

DiagExponent diag_exponent_from_json(const json& j, const std::string& field) {
  const json& arr = j.is_array() ? j : require(j, "eigenvalues", field);
  try {
    return DiagExponent(numbers(arr, field + ".eigenvalues"));
  } catch (const DomainError& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

json to_json(const ScalingFunction& g) {
  json slow = json::array();
  for (const auto& l : g.slow_factors) slow.push_back(to_json(l));
  return {{"exponent", to_json(g.exponent)}, {"slow_factors", slow}};
}

ScalingFunction scaling_function_from_json(const json& j, const std::string& field) {
  DiagExponent e = diag_exponent_from_json(require(j, "exponent", field), field + ".exponent");
  if (!j.contains("slow_factors")) return ScalingFunction(std::move(e));
  std::vector<RVSpec> slow;
  const auto& arr = j.at("slow_factors");
  if (!arr.is_array()) throw ConfigError("field '" + field + ".slow_factors': expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i)
    slow.push_back(rv_spec_from_json(arr[i], field + ".slow_factors[" + std::to_string(i) + "]"));
  try {
    return ScalingFunction(std::move(e), std::move(slow));
  } catch (const DomainError& ex) {
    throw ConfigError("field '" + field + "': " + ex.what());
  }
}

json to_json(const DrivingFunction& g) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, InvertedDirichlet>) return {{"type", "inverted_dirichlet"}, {"theta", v.theta}};
        else if constexpr (std::is_same_v<T, GenericRV>)
          return {{"type", "generic_rv"}, {"beta", v.beta}, {"gamma", v.gamma}};
        else
          return {{"type", "rapid"}};
      },
      g.variant());
}

DrivingFunction driving_function_from_json(const json& j, const std::string& field) {
  const json& type_j = require(j, "type", field);
  if (!type_j.is_string()) throw ConfigError("field '" + field + ".type': expected a string");
  const std::string type = type_j.get<std::string>();
  try {
    if (type == "inverted_dirichlet")
      return DrivingFunction::inverted_dirichlet(number(require(j, "theta", field), field + ".theta"));
    if (type == "generic_rv")
      return DrivingFunction::generic_rv(number(require(j, "beta", field), field + ".beta"),
                                         j.contains("gamma") ? number(j.at("gamma"), field + ".gamma") : 0.0);
    if (type == "rapid") return DrivingFunction::rapid();
  } catch (const IntegrabilityError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
  throw ConfigError("field '" + field + ".type': unknown driving function '" + type +
                    "' (expected inverted_dirichlet|generic_rv|rapid)");
}

json to_json(const LiouvilleParams& p) { return {{"a", p.a()}, {"g", to_json(p.g())}}; }

LiouvilleParams liouville_from_json(const json& j, const std::string& field) {
  std::vector<double> a = numbers(require(j, "a", field), field + ".a");
  DrivingFunction g = driving_function_from_json(require(j, "g", field), field + ".g");
  for (double ai : a)
    if (!(ai > 0.0)) throw ConfigError("field '" + field + ".a': shape parameters must be > 0");
  // IntegrabilityError propagates unchanged so callers see "integrability violated".
  return LiouvilleParams(std::move(a), g);
}

DiagExponent RunConfig::exponent_or_identity() const {
  if (exponent) return *exponent;
  return DiagExponent(std::vector<double>(require_distribution().dim(), 1.0));
}

const LiouvilleParams& RunConfig::require_distribution() const {
  if (!distribution) throw ConfigError("field 'distribution' is missing");
  return *distribution;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  RunConfig cfg;
  cfg.raw = j;
  if (j.contains("distribution")) cfg.distribution = liouville_from_json(j.at("distribution"));
  if (j.contains("exponent")) {
    cfg.exponent = diag_exponent_from_json(j.at("exponent"));
    if (cfg.distribution && cfg.exponent->dim() != cfg.distribution->dim())
      throw ConfigError("field 'exponent': dimension " + std::to_string(cfg.exponent->dim()) +
                        " does not match distribution dimension " + std::to_string(cfg.distribution->dim()));
  }
  if (j.contains("task")) {
    if (!j.at("task").is_object()) throw ConfigError("field 'task': expected an object");
    cfg.task = j.at("task");
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("field 'output': expected a string");
    cfg.output = j.at("output").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("field 'seed': expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("jobs")) {
    if (!j.at("jobs").is_number_unsigned()) throw ConfigError("field 'jobs': expected a positive integer");
    cfg.jobs = std::max(1u, j.at("jobs").get<unsigned>());
  }
  if (j.contains("tolerances")) {
    if (!j.at("tolerances").is_object()) throw ConfigError("field 'tolerances': expected an object");
    cfg.tolerances = j.at("tolerances");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: malformed JSON in '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace opertail
