#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "routh/model.hpp"
#include "routh/reduction.hpp"

namespace routh {

/// Uniformly sampled solution curve with conserved-quantity monitors.
/// `indices` are the (0-based) coordinates carried by q/qd; reduced magnetic
/// flows store empty qd vectors.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::size_t> indices;
  bool has_velocity = true;
  std::vector<Vector> q;
  std::vector<Vector> qd;
  std::vector<Vector> momentum;
  std::vector<double> energy;
  std::optional<std::size_t> failure_step;
  std::string failure_message;

  std::size_t size() const noexcept { return q.size(); }
  bool ok() const noexcept { return !failure_step.has_value(); }
  double time(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * dt; }
};

/// Solves M qdd = dL/dq - (d2L/dqd dq) qd with M the velocity Hessian.
Vector full_el_rhs(const LagrangianSystem& sys, const State& s);

/// Shape accelerations of d/dt dR/dxd - dR/dx = G xd (cases A, B, D).
Vector reduced_el_rhs(const ReducedSystem& red, const Vector& x, const Vector& xd);

/// Velocity solving xd^a G_ab = dR/dx^b (case C).
Vector magnetic_flow_rhs(const ReducedSystem& red, const Vector& x);

struct FlowSample {
  Vector q;
  Vector qd;
  Vector momentum;
  double energy = 0.0;
};

/// First-order system y' = rhs(y) plus the map from y to a stored sample.
struct Flow {
  std::function<Vector(const Vector&)> rhs;
  std::function<FlowSample(const Vector&)> observe;
  std::vector<std::size_t> indices;
  bool has_velocity = true;
};

/// Classical fixed-step RK4. Errors raised by the flow truncate the
/// trajectory and record the failing step.
Trajectory integrate(const Flow& flow, const Vector& y0, double t0, double dt, std::size_t steps);

/// Number of steps and effective step for a horizon T at nominal dt, so the
/// grid ends exactly at T.
struct TimeGrid {
  std::size_t steps = 0;
  double dt = 0.0;
};
TimeGrid make_grid(double horizon, double dt);

Flow full_flow(const LagrangianSystem& sys, const SymmetrySpec& sym);
Flow reduced_flow(const ReducedSystem& red);

Trajectory simulate_full(const LagrangianSystem& sys, const SymmetrySpec& sym, const State& initial, double dt,
                         std::size_t steps);
/// `xd0` is ignored (and may be empty) in the magnetic case.
Trajectory simulate_reduced(const ReducedSystem& red, const Vector& x0, const Vector& xd0, double dt,
                            std::size_t steps);

/// Lifts a reduced trajectory (cases A, B, D): group velocities from the
/// momentum relation at the current group coordinates, group coordinates by
/// RK4 quadrature with Hermite midpoints. Shape columns are copied verbatim.
Trajectory reconstruct(const ReducedSystem& red, const Trajectory& reduced, const Vector& initial_group_coords);

/// Drops group coordinates (A, B, D) or velocities (C). Monitors are copied.
Trajectory project(const Trajectory& full, const ReducedSystem& red);

/// Full state whose momentum equals red.mu(), built from the shape part of
/// `guess` (and its group coordinates).
State initial_on_level(const ReducedSystem& red, const State& guess);

/// max over interior samples of |d/dt dL/dqd - dL/dq| with a 5-point stencil.
double el_residual(const LagrangianSystem& sys, const Trajectory& full);

/// Sup-norm distance between the position columns of two trajectories.
double position_gap(const Trajectory& a, const Trajectory& b);

/// max_t |v(t) - v(0)| over all components.
double max_drift(const std::vector<Vector>& series);
double max_drift(const std::vector<double>& series);

}  // namespace routh
