#pragma once

#include <Eigen/Dense>

#include "routh/autodiff.hpp"

namespace routh {

/// Singularity threshold on the reciprocal condition estimate.
inline constexpr double kSingularRcond = 1e-12;

/// Dense LU with partial pivoting for the small systems the integrators solve.
class LinearSolveWorkspace {
 public:
  LinearSolveWorkspace() = default;
  explicit LinearSolveWorkspace(const Matrix& a) { factor(a); }

  /// Factors `a` and records its reciprocal condition estimate (L1 norm).
  void factor(const Matrix& a);

  double rcond() const noexcept { return rcond_; }
  bool singular() const noexcept { return rcond_ < kSingularRcond; }

  /// Throws RegularityError naming `what` if the factored matrix is singular.
  Vector solve(const Vector& b, const char* what = "singular matrix") const;

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  double rcond_ = 0.0;
  Eigen::Index size_ = 0;
};

/// Numerical rank from singular values above `tol * max(1, sigma_max)`.
Eigen::Index numerical_rank(const Matrix& a, double tol);

}  // namespace routh
