#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "routh/model.hpp"
#include "routh/reduction.hpp"

namespace routh::app {

struct Outputs {
  std::string full_trajectory = "full.csv";
  std::string reduced_trajectory = "reduced.csv";
  std::string lifted_trajectory = "lifted.csv";
  std::string report = "report.json";
};

/// A fully bound scenario: every expression parsed and attached to its slots.
struct Scenario {
  std::string name;
  std::optional<LagrangianSystem> system;
  std::optional<SymmetrySpec> symmetry;  // absent in functional mode
  std::optional<FunctionalSpec> functional;
  SampleBox box;
  MomentumValue mu;
  State initial;
  double dt = 1e-3;
  double horizon = 10.0;
  CheckOptions checks;
  Outputs outputs;
  nlohmann::json source;  // resolved document (builtin merged with overrides)

  bool functional_mode() const noexcept { return functional.has_value(); }
  /// Symmetry used for momentum monitors and reduction.
  SymmetrySpec monitor_symmetry() const;
};

std::vector<std::string> builtin_names();
/// Scenario document of a compiled-in system, or nullopt.
std::optional<nlohmann::json> builtin_scenario(const std::string& name);

/// Replaces a string "system" naming a builtin by the builtin document and
/// merge-patches the remaining keys over it.
nlohmann::json resolve(const nlohmann::json& doc);

/// Throws InputError / ParseError on malformed documents.
Scenario load_scenario(const nlohmann::json& doc);

/// Reads a file; a bare builtin name is accepted when no such file exists.
Scenario load_scenario_file(const std::string& path_or_builtin);

}  // namespace routh::app
