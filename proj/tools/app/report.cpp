#include "routh/app/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace routh::app {

using nlohmann::json;

namespace {

json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

json to_json(const ReportEntry& e) {
  json out;
  out["name"] = e.name;
  out["passed"] = e.passed;
  out["residual"] = number(e.residual);
  out["tolerance"] = number(e.tolerance);
  json pt = json::array();
  for (double x : e.worst_point) pt.push_back(number(x));
  out["worst_point"] = pt;
  if (!e.message.empty()) out["message"] = e.message;
  return out;
}

json to_json(const RunReport& r) {
  json out = r.sections;
  out["command"] = r.command;
  out["scenario"] = r.scenario;
  json checks = json::array();
  for (const auto& e : r.checks.entries) checks.push_back(to_json(e));
  out["checks"] = checks;
  out["exit_status"] = r.exit_status;
  return out;
}

std::string serialize(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t m =
      traj.momentum.empty() ? 0 : static_cast<std::size_t>(traj.momentum.front().size());
  out << "t";
  for (std::size_t i : traj.indices) out << ",q" << i + 1;
  if (traj.has_velocity)
    for (std::size_t i : traj.indices) out << ",qd" << i + 1;
  for (std::size_t a = 0; a < m; ++a) out << ",J" << a + 1;
  out << ",E\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.time(k));
    for (Eigen::Index i = 0; i < traj.q[k].size(); ++i) out << ',' << format_double(traj.q[k](i));
    if (traj.has_velocity)
      for (Eigen::Index i = 0; i < traj.qd[k].size(); ++i) out << ',' << format_double(traj.qd[k](i));
    for (Eigen::Index a = 0; a < traj.momentum[k].size(); ++a) out << ',' << format_double(traj.momentum[k](a));
    out << ',' << format_double(traj.energy[k]) << '\n';
  }
}

void write_csv_file(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  write_csv(out, traj);
}

}  // namespace routh::app
