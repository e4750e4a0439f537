#include "routh/autodiff.hpp"

#include <algorithm>

namespace routh {

ScalarField ScalarField::constant(std::size_t arity, double c) {
  return from_generic(arity, [c]<class T>(std::span<const T>) { return T(c); });
}

Vector grad(const ScalarField& fn, std::span<const double> point) {
  const std::size_t k = point.size();
  std::vector<ad::Dual> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = ad::Dual(point[i]);
  Vector g(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    x[j].deriv = 1.0;
    g[static_cast<Eigen::Index>(j)] = fn(std::span<const ad::Dual>(x)).deriv;
    x[j].deriv = 0.0;
  }
  return g;
}

double directional(const ScalarField& fn, std::span<const double> point, std::span<const double> direction) {
  std::vector<ad::Dual> x(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) x[i] = ad::Dual(point[i], direction[i]);
  return fn(std::span<const ad::Dual>(x)).deriv;
}

namespace {

ad::HyperDual seeded_pass(const ScalarField& fn, std::vector<ad::HyperDual>& x, std::size_t a, std::size_t b) {
  x[a].d1 = 1.0;
  x[b].d2 = 1.0;
  const ad::HyperDual r = fn(std::span<const ad::HyperDual>(x));
  x[a].d1 = 0.0;
  x[b].d2 = 0.0;
  return r;
}

std::vector<ad::HyperDual> lift(std::span<const double> point) {
  std::vector<ad::HyperDual> x(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) x[i] = ad::HyperDual(point[i]);
  return x;
}

}  // namespace

Matrix hessian_block(const ScalarField& fn, std::span<const double> point, std::span<const std::size_t> rows,
                     std::span<const std::size_t> cols) {
  auto x = lift(point);
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  Matrix h(nr, nc);
  const bool symmetric = std::equal(rows.begin(), rows.end(), cols.begin(), cols.end());
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = symmetric ? r : 0; c < nc; ++c) {
      h(r, c) = seeded_pass(fn, x, rows[r], cols[c]).d12;
      if (symmetric) h(c, r) = h(r, c);
    }
  }
  return h;
}

SecondOrder second_order(const ScalarField& fn, std::span<const double> point) {
  auto x = lift(point);
  const auto k = static_cast<Eigen::Index>(point.size());
  SecondOrder out;
  out.gradient = Vector::Zero(k);
  out.hessian = Matrix::Zero(k, k);
  if (k == 0) {
    out.value = fn(std::span<const double>(point));
    return out;
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = r; c < k; ++c) {
      const ad::HyperDual v = seeded_pass(fn, x, static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      if (r == c) {
        out.gradient[r] = v.d1;
        out.value = v.value;
      }
      out.hessian(r, c) = v.d12;
      out.hessian(c, r) = v.d12;
    }
  }
  return out;
}

}  // namespace routh
