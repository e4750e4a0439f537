#include "routh/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "routh/linalg.hpp"

namespace routh {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

Vector gather(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(ix(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[ix(i)] = v[ix(idx[i])];
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

Vector full_el_rhs(const LagrangianSystem& sys, const State& s) {
  const auto n = ix(sys.n());
  const SecondOrder so = second_order(sys.lagrangian(), pack(s.q, s.qd));
  const Matrix mass = so.hessian.block(n, n, n, n);
  const Matrix mixed = so.hessian.block(n, 0, n, n);  // d2L / dqd_i dq_j
  const Vector rhs = so.gradient.head(n) - mixed * s.qd;
  LinearSolveWorkspace ws(mass);
  return ws.solve(rhs, "velocity Hessian of L is singular");
}

Vector reduced_el_rhs(const ReducedSystem& red, const Vector& x, const Vector& xd) {
  if (red.first_order()) throw UnsupportedCaseError("magnetic reduction has a first-order flow");
  const LagrangianSystem& sys = red.system();
  const SymmetrySpec& sym = red.symmetry();
  const std::size_t n = sys.n();
  const std::size_t m = sym.m();
  const std::size_t r = sym.shape_dim();
  const auto& group = sym.group_indices();
  const auto& shape = sym.shape_indices();

  const Vector theta = Vector::Zero(ix(m));
  const State lifted = red.lift(x, xd, theta);
  const Vector psi = gather(lifted.qd, group);
  const SecondOrder so = second_order(sys.lagrangian(), pack(lifted.q, lifted.qd));
  const Matrix& h = so.hessian;
  const Vector& gl = so.gradient;
  const Matrix df = sym.shift_jacobian(lifted.q);
  const Matrix gam = sym.gamma_matrix(lifted.q);
  const Vector shifted_mu = red.mu().mu + sym.shift(lifted.q);

  // dgam[a](k, s) = dGamma^a_s / dx^k
  std::vector<Matrix> dgam(m, Matrix::Zero(ix(r), ix(r)));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t s = 0; s < r; ++s) {
      const Vector g = grad(sym.gamma(a, s), lifted.q);
      for (std::size_t k = 0; k < r; ++k) dgam[a](ix(k), ix(s)) = g[ix(shape[k])];
    }

  Matrix h_gg(ix(m), ix(m));
  Matrix h_g_xd(ix(m), ix(r));
  Matrix h_g_x(ix(m), ix(r));
  Matrix df_x(ix(m), ix(r));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) h_gg(ix(a), ix(b)) = h(ix(n + group[a]), ix(n + group[b]));
    for (std::size_t s = 0; s < r; ++s) {
      h_g_xd(ix(a), ix(s)) = h(ix(n + group[a]), ix(n + shape[s]));
      h_g_x(ix(a), ix(s)) = h(ix(n + group[a]), ix(shape[s]));
      df_x(ix(a), ix(s)) = df(ix(a), ix(shape[s]));
    }
  }
  LinearSolveWorkspace ws(h_gg);
  Matrix dpsi_dxd(ix(m), ix(r));
  Matrix dpsi_dx(ix(m), ix(r));
  for (std::size_t s = 0; s < r; ++s) {
    dpsi_dxd.col(ix(s)) = ws.solve(-h_g_xd.col(ix(s)), "group-velocity Hessian is singular");
    dpsi_dx.col(ix(s)) = ws.solve(df_x.col(ix(s)) - h_g_x.col(ix(s)), "group-velocity Hessian is singular");
  }

  const Vector conn = psi + gam * xd;
  Matrix reduced_mass(ix(r), ix(r));
  Matrix dp_dx(ix(r), ix(r));
  Vector dr_dx(ix(r));
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t vk = n + shape[k];
    double drk = gl[ix(shape[k])] - df.col(ix(shape[k])).dot(conn);
    for (std::size_t a = 0; a < m; ++a) drk -= shifted_mu[ix(a)] * dgam[a].row(ix(k)).dot(xd);
    dr_dx[ix(k)] = drk;
    for (std::size_t s = 0; s < r; ++s) {
      double ms = h(ix(vk), ix(n + shape[s]));
      double ps = h(ix(vk), ix(shape[s]));
      for (std::size_t a = 0; a < m; ++a) {
        const double cross = h(ix(vk), ix(n + group[a]));
        ms += cross * dpsi_dxd(ix(a), ix(s));
        ps += cross * dpsi_dx(ix(a), ix(s));
        ps -= df_x(ix(a), ix(s)) * gam(ix(a), ix(k)) + shifted_mu[ix(a)] * dgam[a](ix(s), ix(k));
      }
      reduced_mass(ix(k), ix(s)) = ms;
      dp_dx(ix(k), ix(s)) = ps;
    }
  }
  const Matrix gyro = red.gyro(x);
  const Vector rhs = dr_dx + gyro * xd - dp_dx * xd;
  LinearSolveWorkspace reduced(reduced_mass);
  return reduced.solve(rhs, "reduced velocity Hessian is singular");
}

Vector magnetic_flow_rhs(const ReducedSystem& red, const Vector& x) {
  if (!red.first_order()) throw UnsupportedCaseError("magnetic flow needs the magnetic reduction");
  const Matrix gyro = red.gyro(x);
  const Vector dr = red.routhian_grad(x, Vector(0)).dx;
  LinearSolveWorkspace ws(gyro.transpose());
  return ws.solve(dr, "gyroscopic form is degenerate");
}

TimeGrid make_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw InputError("dt and T must be positive");
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));
  return {steps, horizon / static_cast<double>(steps)};
}

Trajectory integrate(const Flow& flow, const Vector& y0, double t0, double dt, std::size_t steps) {
  if (!(dt > 0.0) || steps == 0) throw InputError("integrate needs dt > 0 and steps >= 1");
  Trajectory traj;
  traj.t0 = t0;
  traj.dt = dt;
  traj.indices = flow.indices;
  traj.has_velocity = flow.has_velocity;
  traj.q.reserve(steps + 1);
  traj.qd.reserve(steps + 1);
  traj.momentum.reserve(steps + 1);
  traj.energy.reserve(steps + 1);

  auto record = [&](const Vector& y) {
    FlowSample s = flow.observe(y);
    traj.q.push_back(std::move(s.q));
    traj.qd.push_back(std::move(s.qd));
    traj.momentum.push_back(std::move(s.momentum));
    traj.energy.push_back(s.energy);
  };

  Vector y = y0;
  try {
    record(y);
  } catch (const Error& e) {
    traj.failure_step = 0;
    traj.failure_message = e.what();
    return traj;
  }
  for (std::size_t i = 0; i < steps; ++i) {
    try {
      const Vector k1 = flow.rhs(y);
      const Vector k2 = flow.rhs(y + 0.5 * dt * k1);
      const Vector k3 = flow.rhs(y + 0.5 * dt * k2);
      const Vector k4 = flow.rhs(y + dt * k3);
      Vector next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!next.allFinite()) throw DomainError("non-finite state");
      record(next);
      y = std::move(next);
    } catch (const Error& e) {
      traj.failure_step = i + 1;
      traj.failure_message = e.what();
      break;
    }
  }
  return traj;
}

Flow full_flow(const LagrangianSystem& sys, const SymmetrySpec& sym) {
  const auto n = ix(sys.n());
  Flow flow;
  flow.indices = all_indices(sys.n());
  flow.rhs = [sys, n](const Vector& y) {
    State s{0.0, y.head(n), y.tail(n)};
    return concat(s.qd, full_el_rhs(sys, s));
  };
  flow.observe = [sys, sym, n](const Vector& y) {
    State s{0.0, y.head(n), y.tail(n)};
    return FlowSample{s.q, s.qd, momentum(sys, sym, s).mu, energy(sys, s)};
  };
  return flow;
}

Flow reduced_flow(const ReducedSystem& red) {
  Flow flow;
  flow.indices = red.position_indices();
  const auto r = ix(red.shape_dim());
  if (red.first_order()) {
    flow.has_velocity = false;
    flow.rhs = [red](const Vector& y) { return magnetic_flow_rhs(red, y); };
    flow.observe = [red](const Vector& y) {
      const Vector v = magnetic_flow_rhs(red, y);
      const State s{0.0, y, v};
      return FlowSample{y, Vector(0), momentum(red.system(), red.symmetry(), s).mu, red.reduced_energy(y, Vector(0))};
    };
    return flow;
  }
  flow.rhs = [red, r](const Vector& y) {
    const Vector x = y.head(r);
    const Vector xd = y.tail(r);
    return concat(xd, reduced_el_rhs(red, x, xd));
  };
  flow.observe = [red, r](const Vector& y) {
    const Vector x = y.head(r);
    const Vector xd = y.tail(r);
    const State lifted = red.lift(x, xd, Vector::Zero(ix(red.symmetry().m())));
    return FlowSample{x, xd, momentum(red.system(), red.symmetry(), lifted).mu, red.reduced_energy(x, xd)};
  };
  return flow;
}

Trajectory simulate_full(const LagrangianSystem& sys, const SymmetrySpec& sym, const State& initial, double dt,
                         std::size_t steps) {
  if (static_cast<std::size_t>(initial.q.size()) != sys.n() || static_cast<std::size_t>(initial.qd.size()) != sys.n())
    throw InputError("initial state must have n positions and n velocities");
  return integrate(full_flow(sys, sym), pack(initial.q, initial.qd), initial.t, dt, steps);
}

Trajectory simulate_reduced(const ReducedSystem& red, const Vector& x0, const Vector& xd0, double dt,
                            std::size_t steps) {
  if (static_cast<std::size_t>(x0.size()) != red.shape_dim()) throw InputError("reduced initial point has wrong dimension");
  if (red.first_order()) return integrate(reduced_flow(red), x0, 0.0, dt, steps);
  if (static_cast<std::size_t>(xd0.size()) != red.shape_dim())
    throw InputError("reduced initial velocity has wrong dimension");
  return integrate(reduced_flow(red), concat(x0, xd0), 0.0, dt, steps);
}

Trajectory reconstruct(const ReducedSystem& red, const Trajectory& reduced, const Vector& initial_group_coords) {
  if (red.first_order()) throw UnsupportedCaseError("reconstruction applies to second-order reductions");
  const LagrangianSystem& sys = red.system();
  const SymmetrySpec& sym = red.symmetry();
  if (static_cast<std::size_t>(initial_group_coords.size()) != sym.m())
    throw InputError("initial group coordinates must have m components");

  Trajectory full;
  full.t0 = reduced.t0;
  full.dt = reduced.dt;
  full.indices = all_indices(sys.n());
  full.failure_step = reduced.failure_step;
  full.failure_message = reduced.failure_message;
  const double dt = reduced.dt;
  const std::size_t count = reduced.size();

  auto psi_at = [&](const Vector& theta, const Vector& x, const Vector& xd) {
    return red.group_velocity(x, xd, theta);
  };
  auto store = [&](const Vector& theta, const Vector& x, const Vector& xd) {
    State s = red.lift(x, xd, theta);
    full.momentum.push_back(momentum(sys, sym, s).mu);
    full.energy.push_back(energy(sys, s));
    full.q.push_back(std::move(s.q));
    full.qd.push_back(std::move(s.qd));
  };

  if (count == 0) return full;
  Vector theta = initial_group_coords;
  try {
    std::vector<Vector> accel(count);
    for (std::size_t i = 0; i < count; ++i) accel[i] = reduced_el_rhs(red, reduced.q[i], reduced.qd[i]);
    store(theta, reduced.q[0], reduced.qd[0]);
    for (std::size_t i = 0; i + 1 < count; ++i) {
      const Vector& x0 = reduced.q[i];
      const Vector& x1 = reduced.q[i + 1];
      const Vector& v0 = reduced.qd[i];
      const Vector& v1 = reduced.qd[i + 1];
      // cubic Hermite midpoints
      const Vector xm = 0.5 * (x0 + x1) + (dt / 8.0) * (v0 - v1);
      const Vector vm = 0.5 * (v0 + v1) + (dt / 8.0) * (accel[i] - accel[i + 1]);
      const Vector k1 = psi_at(theta, x0, v0);
      const Vector k2 = psi_at(theta + 0.5 * dt * k1, xm, vm);
      const Vector k3 = psi_at(theta + 0.5 * dt * k2, xm, vm);
      const Vector k4 = psi_at(theta + dt * k3, x1, v1);
      theta += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      store(theta, x1, v1);
    }
  } catch (const Error& e) {
    full.failure_step = full.size();
    full.failure_message = e.what();
  }
  return full;
}

Trajectory project(const Trajectory& full, const ReducedSystem& red) {
  Trajectory out;
  out.t0 = full.t0;
  out.dt = full.dt;
  out.indices = red.position_indices();
  out.has_velocity = !red.first_order();
  out.failure_step = full.failure_step;
  out.failure_message = full.failure_message;
  out.momentum = full.momentum;
  out.energy = full.energy;
  for (std::size_t i = 0; i < full.size(); ++i) {
    out.q.push_back(gather(full.q[i], out.indices));
    out.qd.push_back(out.has_velocity ? gather(full.qd[i], out.indices) : Vector(0));
  }
  return out;
}

State initial_on_level(const ReducedSystem& red, const State& guess) {
  const SymmetrySpec& sym = red.symmetry();
  State s;
  if (red.first_order()) {
    s = red.lift(guess.q, Vector(0), Vector(0));
  } else {
    s = red.lift(gather(guess.q, red.position_indices()), gather(guess.qd, red.position_indices()),
                 gather(guess.q, sym.group_indices()));
  }
  s.t = guess.t;
  return s;
}

double el_residual(const LagrangianSystem& sys, const Trajectory& full) {
  const auto n = ix(sys.n());
  const std::size_t count = full.size();
  if (count < 5) return 0.0;
  std::vector<Vector> p(count);
  std::vector<Vector> dq(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector g = grad(sys.lagrangian(), pack(full.q[i], full.qd[i]));
    dq[i] = g.head(n);
    p[i] = g.tail(n);
  }
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < count; ++i) {
    const Vector dp = (p[i - 2] - 8.0 * p[i - 1] + 8.0 * p[i + 1] - p[i + 2]) / (12.0 * full.dt);
    worst = std::max(worst, (dp - dq[i]).cwiseAbs().maxCoeff());
  }
  return worst;
}

double position_gap(const Trajectory& a, const Trajectory& b) {
  if (a.indices != b.indices) throw InputError("trajectories carry different coordinates");
  const std::size_t count = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) worst = std::max(worst, (a.q[i] - b.q[i]).cwiseAbs().maxCoeff());
  return worst;
}

double max_drift(const std::vector<Vector>& series) {
  double worst = 0.0;
  for (const Vector& v : series)
    if (v.size() > 0) worst = std::max(worst, (v - series.front()).cwiseAbs().maxCoeff());
  return worst;
}

double max_drift(const std::vector<double>& series) {
  double worst = 0.0;
  for (double v : series) worst = std::max(worst, std::abs(v - series.front()));
  return worst;
}

}  // namespace routh
