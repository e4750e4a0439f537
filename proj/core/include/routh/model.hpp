#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "routh/autodiff.hpp"

namespace routh {

struct State {
  double t = 0.0;
  Vector q;
  Vector qd;
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

/// Per-coordinate sampling intervals for positions and velocities.
struct SampleBox {
  std::vector<Interval> q;
  std::vector<Interval> qd;

  static SampleBox uniform(std::size_t n, double lo = -1.0, double hi = 1.0);
};

/// Packs (q, qd) into the 2n argument vector the Lagrangian takes.
Vector pack(const Vector& q, const Vector& qd);

/// An autonomous Lagrangian on R^n. The Lagrangian takes 2n arguments,
/// positions first and velocities second.
class LagrangianSystem {
 public:
  LagrangianSystem(std::size_t n, ScalarField lagrangian, std::map<std::string, double> parameters = {},
                   std::vector<std::string> coordinate_names = {});

  std::size_t n() const noexcept { return n_; }
  const ScalarField& lagrangian() const noexcept { return lagrangian_; }
  const std::map<std::string, double>& parameters() const noexcept { return parameters_; }
  const std::vector<std::string>& coordinate_names() const noexcept { return names_; }

  double value(const Vector& q, const Vector& qd) const { return lagrangian_(pack(q, qd)); }

 private:
  std::size_t n_;
  ScalarField lagrangian_;
  std::map<std::string, double> parameters_;
  std::vector<std::string> names_;
};

/**
 * Translational symmetry data: the group acts by shifting the coordinates in
 * `group_indices`. `f[a]` is the quasi-invariance shift for direction a
 * (identically zero for a strictly invariant Lagrangian), `gamma[a][k]` the
 * connection coefficient of direction a along the k-th shape coordinate, and
 * `finite_cocycle[a]` evaluates F for a shift `s` along direction a.
 *
 * f and gamma take the n positions. finite_cocycle takes (q_1..q_n, s).
 */
class SymmetrySpec {
 public:
  SymmetrySpec(std::size_t n, std::vector<std::size_t> group_indices, std::vector<ScalarField> f,
               std::vector<std::vector<ScalarField>> gamma, std::optional<std::vector<ScalarField>> finite_cocycle,
               SampleBox box);

  /// f = 0 and gamma = 0.
  static SymmetrySpec strict(std::size_t n, std::vector<std::size_t> group_indices, SampleBox box);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return group_.size(); }
  std::size_t shape_dim() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& group_indices() const noexcept { return group_; }
  const std::vector<std::size_t>& shape_indices() const noexcept { return shape_; }
  const ScalarField& f(std::size_t a) const { return f_[a]; }
  const ScalarField& gamma(std::size_t a, std::size_t k) const { return gamma_[a][k]; }
  const std::optional<std::vector<ScalarField>>& finite_cocycle() const noexcept { return finite_; }
  const SampleBox& box() const noexcept { return box_; }

  /// f_a(q) for every direction.
  Vector shift(const Vector& q) const;
  /// d f_a / d q^i as an m x n matrix.
  Matrix shift_jacobian(const Vector& q) const;
  /// Gamma^a_k(q) as an m x (n-m) matrix.
  Matrix gamma_matrix(const Vector& q) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> group_;
  std::vector<std::size_t> shape_;
  std::vector<ScalarField> f_;
  std::vector<std::vector<ScalarField>> gamma_;
  std::optional<std::vector<ScalarField>> finite_;
  SampleBox box_;
};

struct MomentumValue {
  Vector mu;
};

struct CocycleMatrix {
  Matrix sigma;
  double constancy_residual = 0.0;
};

struct ReportEntry {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::vector<double> worst_point;
  std::string message;
};

struct VerificationReport {
  std::vector<ReportEntry> entries;

  bool all_passed() const;
  const ReportEntry* find(const std::string& name) const;
  void add(ReportEntry e) { entries.push_back(std::move(e)); }
};

struct CheckOptions {
  std::size_t samples = 256;
  double tolerance = 1e-8;
};

/// Halton points in the (q, qd) box, each of length 2n. Index 0 is skipped.
std::vector<Vector> halton_points(const SampleBox& box, std::size_t count);

/// max |dL/dq^a - qd^i df_a/dq^i| over samples and directions.
ReportEntry check_quasi_invariance(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts = {});

/// max |L(q + g, qd) - L(q, qd) - qd^i dF_g/dq^i| for a group element g in R^m.
/// F_g for a general g is composed from the per-direction F by applying the
/// shifts in index order.
ReportEntry check_finite_cocycle(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& g,
                                 const CheckOptions& opts = {});

/// Fails where the group-velocity Hessian block has scaled |det| < 1e-10.
/// The residual is the worst deficit below that threshold (tolerance 0).
ReportEntry check_G_regularity(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts = {});

/// max |d Gamma^a_k / d q^b| over group directions b.
ReportEntry check_gamma_shape_only(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts = {});

struct ConnectionCheck {
  ReportEntry connection;
  ReportEntry curvature;
};

/// max |df_a/dx^k - Gamma^b_k df_a/dq^b| plus the curvature residual
/// max |dGamma^a_s/dx^k - dGamma^a_k/dx^s|.
ConnectionCheck check_connection_condition(const LagrangianSystem& sys, const SymmetrySpec& sym,
                                           const CheckOptions& opts = {});

/// sigma[a][b] = df_b/dq^a - df_a/dq^b averaged over samples.
CocycleMatrix cocycle(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts = {});

ReportEntry check_cocycle_constancy(const CocycleMatrix& c, const CheckOptions& opts = {});

/// True if every f_a vanishes to tolerance at every sample.
bool shift_vanishes(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts = {});

/// mu_a = dL/dqd^a - f_a(q).
MomentumValue momentum(const LagrangianSystem& sys, const SymmetrySpec& sym, const State& s);

/// qd^i dL/dqd^i - L.
double energy(const LagrangianSystem& sys, const State& s);

}  // namespace routh
