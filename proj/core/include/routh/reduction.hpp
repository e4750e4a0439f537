#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "routh/model.hpp"

namespace routh {

/**
 * Which reduction applies.
 *
 *  StrictCyclic  (A)  f == 0, zero cocycle; isotropy group is the whole group.
 *  QuasiCyclic   (B)  f != 0, zero cocycle.
 *  Magnetic      (C)  nondegenerate cocycle and m == n; the reduced space is
 *                     the configuration space with a first-order flow.
 *  Functional    (D)  level-set reduction with a shift lambda(phi) at mu = 0.
 */
enum class ReductionCase { StrictCyclic, QuasiCyclic, Magnetic, Functional };

std::string_view case_tag(ReductionCase c);   // "A" .. "D"
std::string_view case_name(ReductionCase c);  // "strict_cyclic", ...

/// Throws UnsupportedCaseError for a nonzero degenerate cocycle or a
/// nondegenerate cocycle with m < n.
ReductionCase classify_case(const LagrangianSystem& sys, const SymmetrySpec& sym, const CocycleMatrix& c,
                            const CheckOptions& opts = {});

struct NewtonOptions {
  std::size_t max_iterations = 50;
  double tolerance = 1e-12;  // scaled by 1 + |mu + f|_inf
};

/**
 * Group velocities psi solving dL/dqd^a = mu_a + f_a(q).
 *
 * For m < n, `x`/`xd` are the shape positions and velocities and
 * `group_coords` places the point on the fibre (canonical section: zeros).
 * For m == n, `x` is the whole configuration and `xd` is empty.
 */
Vector solve_velocity(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                      const MomentumValue& mu, const Vector& group_coords, const NewtonOptions& opts = {});
Vector solve_velocity(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                      const MomentumValue& mu);

/// L - (mu_a + f_a)(psi^a + Gamma^a_k xd^k) at qd^a = psi^a.
double routhian(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                const MomentumValue& mu, const Vector& group_coords);
double routhian(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                const MomentumValue& mu);

struct RouthianGradient {
  Vector dx;   // dR / dx
  Vector dxd;  // dR / dxd (empty for m == n)
};

/// Envelope-identity gradient; never differentiates through the Newton solve.
RouthianGradient routhian_grad(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& x, const Vector& xd,
                              const MomentumValue& mu);

/**
 * Coordinate matrix G of the gyroscopic 2-form, B = 1/2 G_ks dx^k ^ dx^s.
 * Reduced motions satisfy d/dt dR/dxd_k - dR/dx_k = G_ks xd^s; in the
 * magnetic case this is xd^a G_ab = dR/dx^b.
 */
Matrix gyroscopic_form(const LagrangianSystem& sys, const SymmetrySpec& sym, ReductionCase c, const Vector& x,
                       const MomentumValue& mu);

/// Level-set reduction data. `mass` is the full n x n inertia matrix in the
/// positions; `lambda`, `mass` and `v_fct` all take the n positions.
struct FunctionalSpec {
  std::size_t phi_index = 0;
  ScalarField lambda;
  std::vector<std::vector<ScalarField>> mass;
  ScalarField v_fct;
};

void validate(const FunctionalSpec& fs, std::size_t n);

/// Symmetry data with the single direction phi, f = lambda and Gamma = 0.
SymmetrySpec functional_symmetry(const FunctionalSpec& fs, std::size_t n, SampleBox box);

/// Positions ordered with the phi slot filled in; theta excludes phi.
Vector functional_config(const FunctionalSpec& fs, const Vector& theta, double phi);

/// (L - lambda phid) with phid = (lambda - M_nk thetad^k) / M_nn.
double functional_routhian(const LagrangianSystem& sys, const FunctionalSpec& fs, const Vector& theta,
                           const Vector& thetad, double phi = 0.0);

/// M_kn thetad^k + M_nn phid - lambda(phi).
double functional_momentum(const LagrangianSystem& sys, const FunctionalSpec& fs, const State& s);

/// |L - (1/2 M qd qd - W - V)| over samples.
ReportEntry check_functional_consistency(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                         const CheckOptions& opts = {});
/// M independent of phi, lambda independent of theta.
ReportEntry check_functional_structure(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                       const CheckOptions& opts = {});
/// |dL/dphi - lambda'(phi) phid| on the level set J = 0.
ReportEntry check_level_set_quasi_invariance(const LagrangianSystem& sys, const FunctionalSpec& fs,
                                             const SampleBox& box, const CheckOptions& opts = {});
/// |L_fct(theta, thetad; phi) - L_fct(theta, thetad; 0)| over sampled phi.
ReportEntry check_phi_independence(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                   const CheckOptions& opts = {});

/// Immutable Routh-reduced system.
class ReducedSystem {
 public:
  ReducedSystem(LagrangianSystem sys, SymmetrySpec sym, MomentumValue mu, ReductionCase c);

  const LagrangianSystem& system() const noexcept { return sys_; }
  const SymmetrySpec& symmetry() const noexcept { return sym_; }
  const MomentumValue& mu() const noexcept { return mu_; }
  ReductionCase reduction_case() const noexcept { return case_; }

  bool first_order() const noexcept { return case_ == ReductionCase::Magnetic; }
  /// n - m, or n in the magnetic case.
  std::size_t shape_dim() const noexcept { return positions_.size(); }
  /// Coordinates kept by the reduced system, in coordinate order.
  const std::vector<std::size_t>& position_indices() const noexcept { return positions_; }

  double routhian(const Vector& x, const Vector& xd) const { return routh::routhian(sys_, sym_, x, xd, mu_); }
  RouthianGradient routhian_grad(const Vector& x, const Vector& xd) const {
    return routh::routhian_grad(sys_, sym_, x, xd, mu_);
  }
  Matrix gyro(const Vector& x) const { return gyroscopic_form(sys_, sym_, case_, x, mu_); }

  Vector group_velocity(const Vector& x, const Vector& xd, const Vector& group_coords) const {
    return solve_velocity(sys_, sym_, x, xd, mu_, group_coords);
  }

  /// Full state over a reduced point with the given group coordinates.
  State lift(const Vector& x, const Vector& xd, const Vector& group_coords) const;

  /// xd . dR/dxd - R.
  double reduced_energy(const Vector& x, const Vector& xd) const;

 private:
  LagrangianSystem sys_;
  SymmetrySpec sym_;
  MomentumValue mu_;
  ReductionCase case_;
  std::vector<std::size_t> positions_;
};

/// Computes the cocycle, classifies and builds the reduced system.
ReducedSystem reduce(const LagrangianSystem& sys, const SymmetrySpec& sym, const MomentumValue& mu,
                     const CheckOptions& opts = {});

/// Functional mode; only mu = 0 is supported.
ReducedSystem reduce_functional(const LagrangianSystem& sys, const FunctionalSpec& fs, const SampleBox& box,
                                const MomentumValue& mu);

}  // namespace routh
