#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "routh/dynamics.hpp"
#include "routh/model.hpp"

namespace routh::app {

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kInputError = 2, kUnsupported = 3, kIntegrationFailure = 4 };

/// Everything a command produced. `sections` holds command-specific blocks
/// (reduction, probe, simulation, comparison).
struct RunReport {
  std::string command;
  std::string scenario;
  VerificationReport checks;
  nlohmann::json sections = nlohmann::json::object();
  int exit_status = kPass;
};

nlohmann::json to_json(const ReportEntry& e);
nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const RunReport& r);

/// Sorted keys, shortest round-trip floats, trailing newline.
std::string serialize(const RunReport& r);

/// Shortest round-trip decimal.
std::string format_double(double x);

/// t, q<i>, qd<i>, J1..Jm, E; coordinates named by their 1-based index.
void write_csv(std::ostream& out, const Trajectory& traj);
void write_csv_file(const std::string& path, const Trajectory& traj);

}  // namespace routh::app
