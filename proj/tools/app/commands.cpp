#include "routh/app/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>

namespace routh::app {

using nlohmann::json;

namespace {

Vector gather(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(idx[k]));
  return out;
}

std::string output_path(const CommandOptions& opts, const std::string& file) {
  namespace fs = std::filesystem;
  const fs::path p(file);
  if (p.is_absolute()) return p.string();
  fs::create_directories(opts.out_dir);
  return (fs::path(opts.out_dir) / p).string();
}

void write_report(const RunReport& r, const Scenario& sc, const CommandOptions& opts) {
  if (!opts.write_files) return;
  std::ofstream out(output_path(opts, sc.outputs.report), std::ios::binary);
  if (!out) throw InputError("cannot write " + sc.outputs.report);
  out << serialize(r);
}

void write_trajectory(const Trajectory& t, const std::string& file, const CommandOptions& opts) {
  if (opts.write_files) write_csv_file(output_path(opts, file), t);
}

ReportEntry threshold_entry(std::string name, double residual, double tolerance, std::string message = {}) {
  ReportEntry e;
  e.name = std::move(name);
  e.residual = residual;
  e.tolerance = tolerance;
  e.passed = std::isfinite(residual) && residual <= tolerance;
  e.message = std::move(message);
  return e;
}

/// max over samples of |J(t) - mu|.
double level_deviation(const std::vector<Vector>& momentum, const Vector& mu) {
  double worst = 0.0;
  for (const auto& j : momentum) {
    if (j.size() != mu.size() || !j.allFinite()) return std::nan("");
    worst = std::max(worst, (j - mu).cwiseAbs().maxCoeff());
  }
  return worst;
}

struct Verification {
  VerificationReport checks;
  json reduction = json::object();
  std::optional<ReductionCase> reduction_case;
  std::string unsupported;
};

Verification run_checks(const Scenario& sc) {
  Verification v;
  const LagrangianSystem& sys = *sc.system;
  const CheckOptions& opts = sc.checks;

  if (sc.functional_mode()) {
    const FunctionalSpec& fs = *sc.functional;
    v.checks.add(check_functional_consistency(sys, fs, sc.box, opts));
    v.checks.add(check_functional_structure(sys, fs, sc.box, opts));
    v.checks.add(check_level_set_quasi_invariance(sys, fs, sc.box, opts));
    v.checks.add(check_phi_independence(sys, fs, sc.box, opts));
    v.checks.add(check_G_regularity(sys, sc.monitor_symmetry(), opts));
    v.reduction_case = ReductionCase::Functional;
    if (sc.mu.mu.size() != 1 || sc.mu.mu[0] != 0.0) {
      v.reduction_case.reset();
      v.unsupported = "functional reduction requires mu = 0";
    }
  } else {
    const SymmetrySpec& sym = *sc.symmetry;
    v.checks.add(check_quasi_invariance(sys, sym, opts));
    v.checks.add(check_G_regularity(sys, sym, opts));
    if (sym.shape_dim() > 0) v.checks.add(check_gamma_shape_only(sys, sym, opts));
    const bool strict = shift_vanishes(sys, sym, opts);
    ConnectionCheck conn = check_connection_condition(sys, sym, opts);
    v.checks.add(conn.connection);
    if (!strict) v.checks.add(conn.curvature);
    const CocycleMatrix c = cocycle(sys, sym, opts);
    v.checks.add(check_cocycle_constancy(c, opts));
    if (sym.finite_cocycle()) {
      Vector g(static_cast<Eigen::Index>(sym.m()));
      for (Eigen::Index a = 0; a < g.size(); ++a) g(a) = (a % 2 == 0 ? 0.5 : -0.75) * static_cast<double>(a + 1);
      v.checks.add(check_finite_cocycle(sys, sym, g, opts));
    }
    v.reduction["cocycle"] = to_json(c.sigma);
    v.reduction["cocycle_constancy"] = c.constancy_residual;
    try {
      if (c.constancy_residual > opts.tolerance) throw UnsupportedCaseError("cocycle is not constant over the sample box");
      v.reduction_case = classify_case(sys, sym, c, opts);
    } catch (const UnsupportedCaseError& e) {
      v.unsupported = e.what();
    }
  }
  if (v.reduction_case) {
    v.reduction["case"] = std::string(case_tag(*v.reduction_case));
    v.reduction["case_name"] = std::string(case_name(*v.reduction_case));
    v.reduction["supported"] = true;
  } else {
    v.reduction["case"] = "unsupported";
    v.reduction["supported"] = false;
    v.reduction["message"] = v.unsupported;
  }
  return v;
}

void print_checks(std::ostream& out, const VerificationReport& r) {
  for (const auto& e : r.entries) {
    out << (e.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << e.name << " residual "
        << format_double(e.residual) << " (tol " << format_double(e.tolerance) << ")";
    if (!e.message.empty()) out << "  " << e.message;
    out << '\n';
  }
}

void print_case(std::ostream& out, const Verification& v) {
  if (v.reduction_case)
    out << "case " << case_tag(*v.reduction_case) << " (" << case_name(*v.reduction_case) << ")\n";
  else
    out << "case unsupported: " << v.unsupported << '\n';
}

RunReport begin(const Scenario& sc, const std::string& command, Verification& v) {
  RunReport r;
  r.command = command;
  r.scenario = sc.name;
  r.checks = v.checks;
  r.sections["reduction"] = v.reduction;
  return r;
}

/// Applies the verify gate shared by reduce, simulate --target reduced and
/// compare. Returns true when the command may proceed.
bool gate(RunReport& r, const Verification& v, std::ostream& out) {
  print_checks(out, v.checks);
  print_case(out, v);
  if (!v.checks.all_passed()) {
    r.exit_status = kCheckFailure;
    return false;
  }
  if (!v.reduction_case) {
    r.exit_status = kUnsupported;
    return false;
  }
  return true;
}

ReducedSystem build_reduced(const Scenario& sc) {
  if (sc.functional_mode()) return reduce_functional(*sc.system, *sc.functional, sc.box, sc.mu);
  return reduce(*sc.system, *sc.symmetry, sc.mu, sc.checks);
}

Vector shape_velocity(const ReducedSystem& red, const State& s) {
  return red.first_order() ? Vector(0) : gather(s.qd, red.position_indices());
}

json trajectory_summary(const Trajectory& t) {
  json out;
  out["samples"] = t.size();
  out["momentum_drift"] = max_drift(t.momentum);
  out["energy_drift"] = max_drift(t.energy);
  out["completed"] = t.ok();
  if (!t.ok()) {
    out["failure_step"] = *t.failure_step;
    out["failure_message"] = t.failure_message;
  }
  return out;
}

void matrix_rows(std::ostream& out, const std::string& label, const Matrix& m) {
  out << label << " =";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << " [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? ", " : "") << format_double(m(i, j));
    out << "]";
  }
  out << '\n';
}

void vector_row(std::ostream& out, const std::string& label, const Vector& v) {
  out << label << " = [";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << format_double(v(i));
  out << "]\n";
}

}  // namespace

RunReport cmd_verify(const Scenario& sc, const CommandOptions& opts, std::ostream& out) {
  Verification v = run_checks(sc);
  RunReport r = begin(sc, "verify", v);
  print_checks(out, v.checks);
  print_case(out, v);
  if (r.sections["reduction"].contains("cocycle"))
    out << "cocycle " << r.sections["reduction"]["cocycle"].dump() << '\n';
  r.exit_status = v.checks.all_passed() ? kPass : kCheckFailure;
  write_report(r, sc, opts);
  return r;
}

RunReport cmd_reduce(const Scenario& sc, const CommandOptions& opts, std::ostream& out) {
  Verification v = run_checks(sc);
  RunReport r = begin(sc, "reduce", v);
  if (!gate(r, v, out)) {
    write_report(r, sc, opts);
    return r;
  }
  const ReducedSystem red = build_reduced(sc);
  const Vector x0 = gather(sc.initial.q, red.position_indices());
  const Vector xd0 = shape_velocity(red, sc.initial);

  json probe;
  probe["x"] = to_json(x0);
  probe["xd"] = to_json(xd0);
  try {
    const Matrix b = red.gyro(x0);
    const double value = red.routhian(x0, xd0);
    const RouthianGradient g = red.routhian_grad(x0, xd0);
    probe["gyroscopic_form"] = to_json(b);
    probe["routhian"] = value;
    probe["gradient_x"] = to_json(g.dx);
    probe["gradient_xd"] = to_json(g.dxd);
    if (!red.first_order()) {
      const Vector group0 = gather(sc.initial.q, red.symmetry().group_indices());
      probe["group_velocity"] = to_json(red.group_velocity(x0, xd0, group0));
      probe["reduced_energy"] = red.reduced_energy(x0, xd0);
    }
    if (sc.functional_mode()) probe["routhian_closed_form"] = functional_routhian(*sc.system, *sc.functional, x0, xd0);

    out << "probe at the initial reduced state\n";
    vector_row(out, "  x", x0);
    if (!red.first_order()) vector_row(out, "  xd", xd0);
    matrix_rows(out, "  B", b);
    out << "  R = " << format_double(value) << '\n';
    vector_row(out, "  dR/dx", g.dx);
    if (!red.first_order()) vector_row(out, "  dR/dxd", g.dxd);
  } catch (const Error& e) {
    probe["error"] = e.what();
    out << "probe failed: " << e.what() << '\n';
    r.exit_status = kCheckFailure;
  }
  r.sections["probe"] = probe;
  write_report(r, sc, opts);
  return r;
}

RunReport cmd_simulate(const Scenario& sc, Target target, const CommandOptions& opts, std::ostream& out) {
  const TimeGrid grid = make_grid(sc.horizon, sc.dt);
  if (target == Target::Full) {
    RunReport r;
    r.command = "simulate";
    r.scenario = sc.name;
    const Trajectory full = simulate_full(*sc.system, sc.monitor_symmetry(), sc.initial, grid.dt, grid.steps);
    write_trajectory(full, sc.outputs.full_trajectory, opts);
    json sim = trajectory_summary(full);
    sim["target"] = "full";
    sim["dt"] = grid.dt;
    sim["steps"] = grid.steps;
    r.sections["simulation"] = sim;
    out << "full trajectory: " << full.size() << " samples, momentum drift "
        << format_double(sim["momentum_drift"].get<double>()) << ", energy drift "
        << format_double(sim["energy_drift"].get<double>()) << '\n';
    if (!full.ok()) {
      out << "integration failed at step " << *full.failure_step << ": " << full.failure_message << '\n';
      r.exit_status = kIntegrationFailure;
    }
    write_report(r, sc, opts);
    return r;
  }

  Verification v = run_checks(sc);
  RunReport r = begin(sc, "simulate", v);
  if (!gate(r, v, out)) {
    write_report(r, sc, opts);
    return r;
  }
  const ReducedSystem red = build_reduced(sc);
  const Vector x0 = gather(sc.initial.q, red.position_indices());
  const Trajectory reduced = simulate_reduced(red, x0, shape_velocity(red, sc.initial), grid.dt, grid.steps);
  write_trajectory(reduced, sc.outputs.reduced_trajectory, opts);
  json sim = trajectory_summary(reduced);
  sim["target"] = "reduced";
  sim["dt"] = grid.dt;
  sim["steps"] = grid.steps;
  bool ok = reduced.ok();
  if (!red.first_order()) {
    const Trajectory lifted = reconstruct(red, reduced, gather(sc.initial.q, red.symmetry().group_indices()));
    write_trajectory(lifted, sc.outputs.lifted_trajectory, opts);
    sim["lifted"] = trajectory_summary(lifted);
    ok = ok && lifted.ok();
  }
  r.sections["simulation"] = sim;
  out << "reduced trajectory: " << reduced.size() << " samples, momentum drift "
      << format_double(sim["momentum_drift"].get<double>()) << ", energy drift "
      << format_double(sim["energy_drift"].get<double>()) << '\n';
  if (!ok) {
    out << "integration failed: " << reduced.failure_message << '\n';
    r.exit_status = kIntegrationFailure;
  }
  write_report(r, sc, opts);
  return r;
}

RunReport cmd_compare(const Scenario& sc, const CommandOptions& opts, std::ostream& out,
                      const CompareTolerances& tol) {
  Verification v = run_checks(sc);
  RunReport r = begin(sc, "compare", v);
  if (!gate(r, v, out)) {
    write_report(r, sc, opts);
    return r;
  }
  const ReducedSystem red = build_reduced(sc);
  const TimeGrid grid = make_grid(sc.horizon, sc.dt);
  const State start = initial_on_level(red, sc.initial);
  const Vector x0 = gather(start.q, red.position_indices());
  const Vector xd0 = shape_velocity(red, start);

  auto full_job = std::async(std::launch::async, [&] {
    return simulate_full(red.system(), red.symmetry(), start, grid.dt, grid.steps);
  });
  auto reduced_job = std::async(std::launch::async, [&] { return simulate_reduced(red, x0, xd0, grid.dt, grid.steps); });
  const Trajectory full = full_job.get();
  const Trajectory reduced = reduced_job.get();

  json cmp;
  cmp["dt"] = grid.dt;
  cmp["steps"] = grid.steps;
  cmp["initial"] = {{"q", to_json(start.q)}, {"qd", to_json(start.qd)}};
  cmp["full"] = trajectory_summary(full);
  cmp["reduced"] = trajectory_summary(reduced);
  write_trajectory(full, sc.outputs.full_trajectory, opts);
  write_trajectory(reduced, sc.outputs.reduced_trajectory, opts);
  bool integrated = full.ok() && reduced.ok();

  VerificationReport cmp_checks;
  cmp_checks.add(threshold_entry("full_momentum_drift", max_drift(full.momentum), tol.conservation));
  cmp_checks.add(threshold_entry("full_energy_drift", max_drift(full.energy), tol.conservation));
  cmp_checks.add(threshold_entry("projection_gap", position_gap(project(full, red), reduced), tol.projection));
  if (red.first_order()) {
    cmp_checks.add(threshold_entry("reduced_momentum_level", level_deviation(reduced.momentum, red.mu().mu),
                                   tol.conservation));
  } else {
    const Trajectory lifted = reconstruct(red, reduced, gather(start.q, red.symmetry().group_indices()));
    write_trajectory(lifted, sc.outputs.lifted_trajectory, opts);
    cmp["lifted"] = trajectory_summary(lifted);
    integrated = integrated && lifted.ok();
    cmp_checks.add(threshold_entry("reconstruction_el_residual", el_residual(red.system(), lifted), tol.el_residual));
    cmp_checks.add(threshold_entry("reconstruction_gap", position_gap(lifted, full), tol.reconstruction));
    cmp_checks.add(
        threshold_entry("lifted_momentum_level", level_deviation(lifted.momentum, red.mu().mu), tol.conservation));
  }
  print_checks(out, cmp_checks);
  for (auto& e : cmp_checks.entries) r.checks.add(e);
  r.sections["comparison"] = cmp;

  if (!integrated) {
    out << "integration failed: " << (full.ok() ? reduced.failure_message : full.failure_message) << '\n';
    r.exit_status = kIntegrationFailure;
  } else if (!cmp_checks.all_passed()) {
    r.exit_status = kCheckFailure;
  }
  write_report(r, sc, opts);
  return r;
}

int cmd_demo(const std::string& name, std::ostream& out, std::ostream& err) {
  const auto doc = builtin_scenario(name);
  if (!doc) {
    err << "unknown builtin '" << name << "'; available:";
    for (const auto& n : builtin_names()) err << ' ' << n;
    err << '\n';
    return kInputError;
  }
  out << doc->dump(2) << '\n';
  return kPass;
}

}  // namespace routh::app
