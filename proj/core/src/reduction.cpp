#include "routh/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "routh/linalg.hpp"

namespace routh {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

// Full positions over a reduced point. In the magnetic case x is already the
// whole configuration.
Vector assemble_q(const SymmetrySpec& sym, const Vector& x, const Vector& group_coords) {
  const std::size_t n = sym.n();
  if (sym.shape_dim() == 0) {
    if (static_cast<std::size_t>(x.size()) != n) throw InputError("expected the full configuration");
    return x;
  }
  if (static_cast<std::size_t>(x.size()) != sym.shape_dim()) throw InputError("shape point has wrong dimension");
  if (static_cast<std::size_t>(group_coords.size()) != sym.m()) throw InputError("group coordinates have wrong dimension");
  Vector q(ix(n));
  for (std::size_t a = 0; a < sym.m(); ++a) q[ix(sym.group_indices()[a])] = group_coords[ix(a)];
  for (std::size_t k = 0; k < sym.shape_dim(); ++k) q[ix(sym.shape_indices()[k])] = x[ix(k)];
  return q;
}

Vector assemble_qd(const SymmetrySpec& sym, const Vector& xd, const Vector& psi) {
  if (static_cast<std::size_t>(xd.size()) != sym.shape_dim()) throw InputError("shape velocity has wrong dimension");
  Vector qd(ix(sym.n()));
  for (std::size_t a = 0; a < sym.m(); ++a) qd[ix(sym.group_indices()[a])] = psi[ix(a)];
  for (std::size_t k = 0; k < sym.shape_dim(); ++k) qd[ix(sym.shape_indices()[k])] = xd[ix(k)];
  return qd;
}

Vector section(const SymmetrySpec& sym) { return Vector::Zero(ix(sym.m())); }

std::vector<std::size_t> group_velocity_slots(const SymmetrySpec& sym) {
  std::vector<std::size_t> slots;
  for (std::size_t a : sym.group_indices()) slots.push_back(sym.n() + a);
  return slots;
}

// dL/dqd^a for the group directions.
Vector group_momenta(const LagrangianSystem& sys, const std::vector<std::size_t>& slots, const Vector& z) {
  Vector p(ix(slots.size()));
  std::vector<double> dir(static_cast<std::size_t>(z.size()), 0.0);
  for (std::size_t a = 0; a < slots.size(); ++a) {
    dir[slots[a]] = 1.0;
    p[ix(a)] = directional(sys.lagrangian(), std::span<const double>(z.data(), z.size()), dir);
    dir[slots[a]] = 0.0;
  }
  return p;
}

void check_mu(const SymmetrySpec& sym, const MomentumValue& mu) {
  if (static_cast<std::size_t>(mu.mu.size()) != sym.m()) throw InputError("mu must have m components");
}

// d Gamma^a_s / d x^k, stored as dgamma[a](k, s).
std::vector<Matrix> gamma_derivatives(const SymmetrySpec& sym, const Vector& q) {
  const std::size_t r = sym.shape_dim();
  std::vector<Matrix> out(sym.m(), Matrix::Zero(ix(r), ix(r)));
  for (std::size_t a = 0; a < sym.m(); ++a)
    for (std::size_t s = 0; s < r; ++s) {
      const Vector g = grad(sym.gamma(a, s), q);
      for (std::size_t k = 0; k < r; ++k) out[a](ix(k), ix(s)) = g[ix(sym.shape_indices()[k])];
    }
  return out;
}

}  // namespace

std::string_view case_tag(ReductionCase c) {
  switch (c) {
    case ReductionCase::StrictCyclic:
      return "A";
    case ReductionCase::QuasiCyclic:
      return "B";
    case ReductionCase::Magnetic:
      return "C";
    case ReductionCase::Functional:
      return "D";
  }
  return "?";
}

std::string_view case_name(ReductionCase c) {
  switch (c) {
    case ReductionCase::StrictCyclic:
      return "strict_cyclic";
    case ReductionCase::QuasiCyclic:
      return "quasi_cyclic";
    case ReductionCase::Magnetic:
      return "magnetic";
    case ReductionCase::Functional:
      return "functional";
  }
  return "unknown";
}

ReductionCase classify_case(const LagrangianSystem& sys, const SymmetrySpec& sym, const CocycleMatrix& c,
                            const CheckOptions& opts) {
  const double largest = c.sigma.size() == 0 ? 0.0 : c.sigma.cwiseAbs().maxCoeff();
  if (largest <= opts.tolerance)
    return shift_vanishes(sys, sym, opts) ? ReductionCase::StrictCyclic : ReductionCase::QuasiCyclic;
  const Idx rank = numerical_rank(c.sigma, opts.tolerance);
  const auto m = static_cast<Idx>(sym.m());
  if (rank == m && sym.m() == sym.n()) return ReductionCase::Magnetic;
  if (rank == m)
    throw UnsupportedCaseError("nondegenerate cocycle with m = " + std::to_string(sym.m()) + " < n = " +
                               std::to_string(sym.n()) + " (rank " + std::to_string(rank) + ")");
  throw UnsupportedCaseError("degenerate nonzero cocycle of rank " + std::to_string(rank) + " for m = " +
                             std::to_string(sym.m()));
}

Vector solve_velocity(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                      const MomentumValue& mu, const Vector& group_coords, const NewtonOptions& opts) {
  check_mu(sym, mu);
  const Vector q = assemble_q(sym, x, group_coords);
  const Vector target = mu.mu + sym.shift(q);
  const auto slots = group_velocity_slots(sym);
  const double tol = opts.tolerance * (1.0 + target.cwiseAbs().maxCoeff());

  auto residual = [&](const Vector& psi) {
    return Vector(group_momenta(sys, slots, pack(q, assemble_qd(sym, xd, psi))) - target);
  };

  Vector psi = Vector::Zero(ix(sym.m()));
  Vector r = residual(psi);
  double norm = r.cwiseAbs().maxCoeff();
  LinearSolveWorkspace ws;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    if (norm <= tol) return psi;
    const Vector z = pack(q, assemble_qd(sym, xd, psi));
    ws.factor(hessian_block(sys.lagrangian(), z, slots, slots));
    const Vector step = ws.solve(-r, "group-velocity Hessian is singular");
    double scale = 1.0;
    Vector candidate = psi + step;
    Vector rc = residual(candidate);
    double nc = rc.cwiseAbs().maxCoeff();
    for (int halving = 0; halving < 30 && !(nc < norm); ++halving) {
      scale *= 0.5;
      candidate = psi + scale * step;
      rc = residual(candidate);
      nc = rc.cwiseAbs().maxCoeff();
    }
    psi = std::move(candidate);
    r = std::move(rc);
    norm = nc;
  }
  if (norm <= tol) return psi;
  throw ConvergenceError("group-velocity Newton solve did not converge", norm);
}

Vector solve_velocity(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                      const MomentumValue& mu) {
  return solve_velocity(sys, sym, x, xd, mu, section(sym));
}

double routhian(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                const MomentumValue& mu, const Vector& group_coords) {
  const Vector psi = solve_velocity(sys, sym, x, xd, mu, group_coords);
  const Vector q = assemble_q(sym, x, group_coords);
  const Vector qd = assemble_qd(sym, xd, psi);
  const Vector conn = sym.shape_dim() == 0 ? psi : Vector(psi + sym.gamma_matrix(q) * xd);
  return sys.value(q, qd) - (mu.mu + sym.shift(q)).dot(conn);
}

double routhian(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                const MomentumValue& mu) {
  return routhian(sys, sym, x, xd, mu, section(sym));
}

RouthianGradient routhian_grad(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                               const MomentumValue& mu) {
  const std::size_t n = sys.n();
  const Vector theta = section(sym);
  const Vector psi = solve_velocity(sys, sym, x, xd, mu, theta);
  const Vector q = assemble_q(sym, x, theta);
  const Vector qd = assemble_qd(sym, xd, psi);
  const Vector gl = grad(sys.lagrangian(), pack(q, qd));
  const Matrix df = sym.shift_jacobian(q);
  const Vector shifted_mu = mu.mu + sym.shift(q);

  RouthianGradient out;
  if (sym.shape_dim() == 0) {
    // every coordinate is a group coordinate; x = q
    out.dx = gl.head(ix(n)) - df.transpose() * psi;
    out.dxd = Vector(0);
    return out;
  }
  const std::size_t r = sym.shape_dim();
  const Matrix gam = sym.gamma_matrix(q);
  const auto dgam = gamma_derivatives(sym, q);
  const Vector conn = psi + gam * xd;
  out.dx = Vector(ix(r));
  out.dxd = Vector(ix(r));
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t idx = sym.shape_indices()[k];
    double dx = gl[ix(idx)] - df.col(ix(idx)).dot(conn);
    for (std::size_t a = 0; a < sym.m(); ++a) dx -= shifted_mu[ix(a)] * dgam[a].row(ix(k)).dot(xd);
    out.dx[ix(k)] = dx;
    out.dxd[ix(k)] = gl[ix(n + idx)] - shifted_mu.dot(gam.col(ix(k)));
  }
  return out;
}

Matrix gyroscopic_form(const LagrangianSystem&, const SymmetrySpec& sym, ReductionCase c, const Vector& x,
                       const MomentumValue& mu) {
  check_mu(sym, mu);
  if (c == ReductionCase::Magnetic) {
    const std::size_t n = sym.n();
    const Matrix df = sym.shift_jacobian(assemble_q(sym, x, section(sym)));
    // direction index owning each coordinate
    std::vector<std::size_t> owner(n);
    for (std::size_t a = 0; a < sym.m(); ++a) owner[sym.group_indices()[a]] = a;
    Matrix g(ix(n), ix(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(ix(i), ix(j)) = df(ix(owner[j]), ix(i)) - df(ix(owner[i]), ix(j));
    return g;
  }
  const Vector q = assemble_q(sym, x, section(sym));
  const Vector shifted_mu = mu.mu + sym.shift(q);
  const auto dgam = gamma_derivatives(sym, q);
  const auto r = ix(sym.shape_dim());
  Matrix g = Matrix::Zero(r, r);
  for (std::size_t a = 0; a < sym.m(); ++a) g += shifted_mu[ix(a)] * (dgam[a] - dgam[a].transpose());
  return g;
}

// ---- functional mode --------------------------------------------------------

void validate(const FunctionalSpec& fs, std::size_t n) {
  if (n < 2) throw InputError("functional reduction needs n >= 2");
  if (fs.phi_index >= n) throw InputError("phi index out of range");
  if (!fs.lambda.valid() || fs.lambda.arity() != n) throw InputError("lambda must take the n positions");
  if (!fs.v_fct.valid() || fs.v_fct.arity() != n) throw InputError("V_fct must take the n positions");
  if (fs.mass.size() != n) throw InputError("mass matrix must be n x n");
  for (const auto& row : fs.mass) {
    if (row.size() != n) throw InputError("mass matrix must be n x n");
    for (const auto& e : row)
      if (!e.valid() || e.arity() != n) throw InputError("mass entries must take the n positions");
  }
}

SymmetrySpec functional_symmetry(const FunctionalSpec& fs, std::size_t n, SampleBox box) {
  validate(fs, n);
  std::vector<std::vector<ScalarField>> gamma(1, std::vector<ScalarField>(n - 1, ScalarField::constant(n, 0.0)));
  return SymmetrySpec(n, {fs.phi_index}, {fs.lambda}, std::move(gamma), std::nullopt, std::move(box));
}

Vector functional_config(const FunctionalSpec& fs, const Vector& theta, double phi) {
  const auto n = theta.size() + 1;
  Vector q(n);
  Idx t = 0;
  for (Idx i = 0; i < n; ++i) q[i] = i == ix(fs.phi_index) ? phi : theta[t++];
  return q;
}

namespace {

Matrix mass_matrix(const FunctionalSpec& fs, const Vector& q) {
  const auto n = ix(fs.mass.size());
  Matrix m(n, n);
  for (Idx i = 0; i < n; ++i)
    for (Idx j = 0; j < n; ++j) m(i, j) = fs.mass[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](q);
  return m;
}

// phid on the level set J = 0 from the closed form.
double level_set_phid(const FunctionalSpec& fs, const Matrix& mass, const Vector& q, const Vector& qd) {
  const Idx p = ix(fs.phi_index);
  const double mnn = mass(p, p);
  if (mnn == 0.0) throw RegularityError("M_nn vanishes", 0.0);
  double coupling = 0.0;
  for (Idx k = 0; k < q.size(); ++k)
    if (k != p) coupling += mass(p, k) * qd[k];
  return (fs.lambda(q) - coupling) / mnn;
}

Vector drop_phi(const FunctionalSpec& fs, const Vector& v) {
  Vector out(v.size() - 1);
  Idx t = 0;
  for (Idx i = 0; i < v.size(); ++i)
    if (i != ix(fs.phi_index)) out[t++] = v[i];
  return out;
}

template <class Fn>
ReportEntry functional_sample(std::string name, const SampleBox& box, const CheckOptions& opts, Fn fn) {
  ReportEntry e;
  e.name = std::move(name);
  e.tolerance = opts.tolerance;
  double worst = 0.0;
  for (const Vector& z : halton_points(box, opts.samples)) {
    double r = 0.0;
    try {
      r = fn(z);
    } catch (const Error& err) {
      e.residual = std::numeric_limits<double>::quiet_NaN();
      e.worst_point.assign(z.data(), z.data() + z.size());
      e.message = err.what();
      e.passed = false;
      return e;
    }
    if (r > worst || e.worst_point.empty()) {
      worst = r;
      e.worst_point.assign(z.data(), z.data() + z.size());
    }
  }
  e.residual = worst;
  e.passed = worst <= opts.tolerance;
  return e;
}

}  // namespace

double functional_routhian(const LagrangianSystem& sys, const FunctionalSpec& fs, const Vector& theta,
                           const Vector& thetad, double phi) {
  const Vector q = functional_config(fs, theta, phi);
  Vector qd = functional_config(fs, thetad, 0.0);
  const Matrix mass = mass_matrix(fs, q);
  const double phid = level_set_phid(fs, mass, q, qd);
  qd[ix(fs.phi_index)] = phid;
  return sys.value(q, qd) - fs.lambda(q) * phid;
}

double functional_momentum(const LagrangianSystem&, const FunctionalSpec& fs, const State& s) {
  const Matrix mass = mass_matrix(fs, s.q);
  return mass.col(ix(fs.phi_index)).dot(s.qd) - fs.lambda(s.q);
}

ReportEntry check_functional_consistency(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                         const CheckOptions& opts) {
  const auto n = ix(sys.n());
  const Idx p = ix(fs.phi_index);
  return functional_sample("functional_consistency", box, opts, [&](const Vector& z) {
    const Vector q = z.head(n);
    const Vector qd = z.tail(n);
    const Matrix mass = mass_matrix(fs, q);
    const double mnn = mass(p, p);
    if (mnn == 0.0) throw RegularityError("M_nn vanishes", 0.0);
    const double lam = fs.lambda(q);
    double coupling = 0.0;
    for (Idx k = 0; k < n; ++k)
      if (k != p) coupling += mass(p, k) * qd[k];
    const double w = lam / mnn * coupling;
    const double v = fs.v_fct(q) - 0.5 * lam * lam / mnn;
    return std::abs(sys.value(q, qd) - (0.5 * qd.dot(mass * qd) - w - v));
  });
}

ReportEntry check_functional_structure(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                       const CheckOptions& opts) {
  const auto n = ix(sys.n());
  const Idx p = ix(fs.phi_index);
  return functional_sample("functional_structure", box, opts, [&](const Vector& z) {
    const Vector q = z.head(n);
    double worst = 0.0;
    for (const auto& row : fs.mass)
      for (const auto& e : row) worst = std::max(worst, std::abs(grad(e, q)[p]));
    worst = std::max(worst, std::abs(grad(fs.v_fct, q)[p]));
    const Vector dl = grad(fs.lambda, q);
    for (Idx k = 0; k < n; ++k)
      if (k != p) worst = std::max(worst, std::abs(dl[k]));
    return worst;
  });
}

ReportEntry check_level_set_quasi_invariance(const LagrangianSystem& sys, const FunctionalSpec& fs,
                                             const SampleBox& box, const CheckOptions& opts) {
  const auto n = ix(sys.n());
  const Idx p = ix(fs.phi_index);
  return functional_sample("level_set_quasi_invariance", box, opts, [&](const Vector& z) {
    const Vector q = z.head(n);
    Vector qd = z.tail(n);
    qd[p] = level_set_phid(fs, mass_matrix(fs, q), q, qd);
    const double dl_dphi = grad(sys.lagrangian(), pack(q, qd))[p];
    const double dlambda = grad(fs.lambda, q)[p];
    return std::abs(dl_dphi - dlambda * qd[p]);
  });
}

ReportEntry check_phi_independence(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                   const CheckOptions& opts) {
  const auto n = ix(sys.n());
  const Idx p = ix(fs.phi_index);
  return functional_sample("phi_independence", box, opts, [&](const Vector& z) {
    const Vector q = z.head(n);
    const Vector qd = z.tail(n);
    const Vector theta = drop_phi(fs, q);
    const Vector thetad = drop_phi(fs, qd);
    return std::abs(functional_routhian(sys, fs, theta, thetad, q[p]) - functional_routhian(sys, fs, theta, thetad, 0.0));
  });
}

// ---- ReducedSystem ----------------------------------------------------------

ReducedSystem::ReducedSystem(LagrangianSystem sys, SymmetrySpec sym, MomentumValue mu, ReductionCase c)
    : sys_(std::move(sys)), sym_(std::move(sym)), mu_(std::move(mu)), case_(c) {
  check_mu(sym_, mu_);
  if (sym_.n() != sys_.n()) throw InputError("symmetry and system dimensions differ");
  if (case_ == ReductionCase::Magnetic) {
    if (sym_.m() != sym_.n()) throw UnsupportedCaseError("magnetic reduction needs m = n");
    for (std::size_t i = 0; i < sys_.n(); ++i) positions_.push_back(i);
  } else {
    if (sym_.shape_dim() == 0) throw UnsupportedCaseError("second-order reduction needs m < n");
    positions_ = sym_.shape_indices();
  }
}

State ReducedSystem::lift(const Vector& x, const Vector& xd, const Vector& group_coords) const {
  State s;
  s.q = assemble_q(sym_, x, group_coords);
  const Vector psi = solve_velocity(sys_, sym_, x, xd, mu_, group_coords);
  s.qd = assemble_qd(sym_, xd, psi);
  return s;
}

double ReducedSystem::reduced_energy(const Vector& x, const Vector& xd) const {
  const double r = routhian(x, xd);
  if (first_order()) return -r;
  return xd.dot(routhian_grad(x, xd).dxd) - r;
}

ReducedSystem reduce(const LagrangianSystem& sys, const SymmetrySpec& sym, const MomentumValue& mu,
                     const CheckOptions& opts) {
  const CocycleMatrix c = cocycle(sys, sym, opts);
  if (c.constancy_residual > opts.tolerance)
    throw UnsupportedCaseError("cocycle is not constant over the sample box (variation " +
                               std::to_string(c.constancy_residual) + ")");
  return ReducedSystem(sys, sym, mu, classify_case(sys, sym, c, opts));
}

ReducedSystem reduce_functional(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                const MomentumValue& mu) {
  if (mu.mu.size() != 1 || mu.mu[0] != 0.0) throw UnsupportedCaseError("functional reduction requires mu = 0");
  return ReducedSystem(sys, functional_symmetry(fs, sys.n(), box), mu, ReductionCase::Functional);
}

}  // namespace routh
