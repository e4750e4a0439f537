#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "routh/app/report.hpp"
#include "routh/app/scenario.hpp"

namespace routh::app {

enum class Target { Full, Reduced };

struct CommandOptions {
  std::string out_dir = ".";
  bool write_files = true;
};

/// Pass/fail thresholds for cmd_compare.
struct CompareTolerances {
  double projection = 1e-6;
  double el_residual = 1e-6;
  double reconstruction = 1e-6;
  double conservation = 1e-8;
};

RunReport cmd_verify(const Scenario& sc, const CommandOptions& opts, std::ostream& out);
RunReport cmd_reduce(const Scenario& sc, const CommandOptions& opts, std::ostream& out);
RunReport cmd_simulate(const Scenario& sc, Target target, const CommandOptions& opts, std::ostream& out);
RunReport cmd_compare(const Scenario& sc, const CommandOptions& opts, std::ostream& out,
                      const CompareTolerances& tol = {});
/// Prints the builtin scenario document; kInputError for unknown names.
int cmd_demo(const std::string& name, std::ostream& out, std::ostream& err);

/// Entry point of the `routh` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace routh::app
