#include <map>
#include <string_view>

#include "routh/app/scenario.hpp"

namespace routh::app {

namespace {

// Compiled-in scenarios. They go through exactly the same loader as user files.
const std::map<std::string, std::string_view>& builtins() {
  static const std::map<std::string, std::string_view> table{
      {"charged_particle", R"json({
  "name": "charged_particle",
  "system": {
    "n": 2,
    "lagrangian": "0.5*m*(qd1^2+qd2^2)+e*B*(qd1*q2-qd2*q1)",
    "parameters": {"m": 1, "e": 1, "B": 1}
  },
  "symmetry": {
    "indices": [1, 2],
    "f": ["-e*B*q2", "e*B*q1"],
    "F": ["-e*B*s*q2", "e*B*s*q1"]
  },
  "mu": [1, 0],
  "initial": {"q": [0, 0], "qd": [1, 0]},
  "integrator": {"dt": 0.001, "T": 10},
  "checks": {"samples": 256, "tolerance": 1e-8}
})json"},
      {"free_cyclic", R"json({
  "name": "free_cyclic",
  "system": {
    "n": 2,
    "lagrangian": "0.5*(qd1^2+qd2^2)"
  },
  "symmetry": {
    "indices": [1],
    "f": ["0"],
    "gamma": [["0"]],
    "F": ["0"]
  },
  "mu": [1],
  "initial": {"q": [0, 0], "qd": [1, 2]},
  "integrator": {"dt": 0.001, "T": 10},
  "checks": {"samples": 256, "tolerance": 1e-8}
})json"},
      {"quasi_cyclic_totalderiv", R"json({
  "name": "quasi_cyclic_totalderiv",
  "system": {
    "n": 2,
    "lagrangian": "0.5*(qd1^2+qd2^2)+(qd1-qd2)*exp(q1-q2)"
  },
  "symmetry": {
    "indices": [1],
    "f": ["exp(q1-q2)"],
    "gamma": [["-1"]],
    "F": ["(exp(s)-1)*exp(q1-q2)"]
  },
  "mu": [0.5],
  "initial": {"q": [0, 0.2], "qd": [0.5, 0.3]},
  "integrator": {"dt": 0.001, "T": 10},
  "checks": {"samples": 256, "tolerance": 1e-8}
})json"},
      {"curved_gamma", R"json({
  "name": "curved_gamma",
  "system": {
    "n": 3,
    "lagrangian": "0.5*(qd1+q2*qd3)^2+0.5*(qd2^2+qd3^2)-0.5*(q2^2+q3^2)"
  },
  "symmetry": {
    "indices": [1],
    "f": ["0"],
    "gamma": [["0", "q2"]],
    "F": ["0"]
  },
  "mu": [1],
  "initial": {"q": [0, 0.5, 0], "qd": [0.85, 0, 0.3]},
  "integrator": {"dt": 0.001, "T": 10},
  "checks": {"samples": 256, "tolerance": 1e-8}
})json"},
      {"functional_toy", R"json({
  "name": "functional_toy",
  "system": {
    "n": 2,
    "lagrangian": "0.5*(qd1^2+qd2^2)-0.5*q1^2+0.5*q2^2"
  },
  "functional": {
    "phi_index": 2,
    "lambda": "-q2",
    "mass": [["1", "0"], ["0", "1"]],
    "V_fct": "0.5*q1^2"
  },
  "mu": [0],
  "initial": {"q": [0.5, 0.3], "qd": [0, -0.3]},
  "integrator": {"dt": 0.001, "T": 10},
  "checks": {"samples": 256, "tolerance": 1e-8}
})json"},
  };
  return table;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : builtins()) names.push_back(name);
  return names;
}

std::optional<nlohmann::json> builtin_scenario(const std::string& name) {
  const auto it = builtins().find(name);
  if (it == builtins().end()) return std::nullopt;
  return nlohmann::json::parse(it->second);
}

}  // namespace routh::app
