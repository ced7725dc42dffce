#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "opertail/liouville.hpp"
#include "opertail/opscale.hpp"
#include "opertail/regvar.hpp"

namespace opertail {

// JSON schema shared by the CLI and the Python bindings. Every parser throws
// ConfigError naming the offending field; parameter invariants (e.g.
// integrability) surface as the owning module's DomainError.

nlohmann::json to_json(const RVSpec& v);
RVSpec rv_spec_from_json(const nlohmann::json& j, const std::string& field = "rv");

nlohmann::json to_json(const DiagExponent& e);
/// Accepts {"eigenvalues": [...]} or a bare array.
DiagExponent diag_exponent_from_json(const nlohmann::json& j, const std::string& field = "exponent");

nlohmann::json to_json(const ScalingFunction& g);
ScalingFunction scaling_function_from_json(const nlohmann::json& j, const std::string& field = "scaling");

nlohmann::json to_json(const DrivingFunction& g);
DrivingFunction driving_function_from_json(const nlohmann::json& j, const std::string& field = "g");

nlohmann::json to_json(const LiouvilleParams& p);
LiouvilleParams liouville_from_json(const nlohmann::json& j, const std::string& field = "distribution");

/// One experiment: distribution, optional exponent, a task object whose keys
/// depend on the command, and run controls.
struct RunConfig {
  nlohmann::json raw;
  std::optional<LiouvilleParams> distribution;
  std::optional<DiagExponent> exponent;
  nlohmann::json task = nlohmann::json::object();
  std::string output;
  std::uint64_t seed = 20240917;
  unsigned jobs = 1;
  nlohmann::json tolerances = nlohmann::json::object();

  /// Exponent from the config, or diag(1, ..., 1) of the distribution's dimension.
  DiagExponent exponent_or_identity() const;
  const LiouvilleParams& require_distribution() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace opertail
