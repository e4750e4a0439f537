#include "routh/linalg.hpp"

#include <algorithm>

namespace routh {

void LinearSolveWorkspace::factor(const Matrix& a) {
  size_ = a.rows();
  if (size_ == 0) {
    rcond_ = 1.0;
    return;
  }
  if (!a.allFinite()) {
    rcond_ = 0.0;
    return;
  }
  lu_.compute(a);
  rcond_ = lu_.rcond();
  if (!(rcond_ >= 0.0)) rcond_ = 0.0;
}

Vector LinearSolveWorkspace::solve(const Vector& b, const char* what) const {
  if (size_ == 0) return Vector(0);
  if (singular()) throw RegularityError(what, rcond_);
  return lu_.solve(b);
}

Eigen::Index numerical_rank(const Matrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s.maxCoeff());
  return (s.array() > cutoff).count();
}

}  // namespace routh
