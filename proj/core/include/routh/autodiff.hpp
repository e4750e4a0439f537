#pragma once

/**
 * Forward-mode differentiation scalars.
 *
 * Dual carries one directional derivative, HyperDual carries two seed
 * directions plus their cross term, which is enough for every Hessian block
 * the library needs. Model functions are written once against the generic
 * scalar interface below and evaluated with double, Dual or HyperDual.
 */

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "routh/errors.hpp"

namespace routh {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace ad {

struct Dual {
  double value = 0.0;
  double deriv = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double v, double d) : value(v), deriv(d) {}
};

/// value + d1 e1 + d2 e2 + d12 e1 e2 with e1^2 = e2^2 = 0.
struct HyperDual {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  constexpr HyperDual(double v, double a, double b, double ab) : value(v), d1(a), d2(b), d12(ab) {}
};

// ---- Dual arithmetic ----------------------------------------------------------

constexpr Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
constexpr Dual operator-(Dual a) { return {-a.value, -a.deriv}; }
constexpr Dual operator*(Dual a, Dual b) {
  return {a.value * b.value, a.value * b.deriv + a.deriv * b.value};
}
inline Dual operator/(Dual a, Dual b) {
  if (b.value == 0.0) throw DomainError("division by zero");
  const double inv = 1.0 / b.value;
  return {a.value * inv, (a.deriv * b.value - a.value * b.deriv) * inv * inv};
}

// ---- HyperDual arithmetic -----------------------------------------------------

constexpr HyperDual operator+(HyperDual a, HyperDual b) {
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
constexpr HyperDual operator-(HyperDual a, HyperDual b) {
  return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
constexpr HyperDual operator-(HyperDual a) { return {-a.value, -a.d1, -a.d2, -a.d12}; }
constexpr HyperDual operator*(HyperDual a, HyperDual b) {
  return {a.value * b.value, a.value * b.d1 + a.d1 * b.value, a.value * b.d2 + a.d2 * b.value,
          a.value * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + a.d12 * b.value};
}

// Applies a scalar function given f(v), f'(v), f''(v).
constexpr Dual chain(Dual x, double f0, double f1, double /*f2*/) { return {f0, f1 * x.deriv}; }
constexpr HyperDual chain(HyperDual x, double f0, double f1, double f2) {
  return {f0, f1 * x.d1, f1 * x.d2, f1 * x.d12 + f2 * x.d1 * x.d2};
}

inline HyperDual operator/(HyperDual a, HyperDual b) {
  if (b.value == 0.0) throw DomainError("division by zero");
  const double inv = 1.0 / b.value;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

// ---- scalar-family helpers ----------------------------------------------------

constexpr double primal(double x) { return x; }
constexpr double primal(Dual x) { return x.value; }
constexpr double primal(HyperDual x) { return x.value; }

constexpr bool has_derivative(double) { return false; }
constexpr bool has_derivative(Dual x) { return x.deriv != 0.0; }
constexpr bool has_derivative(HyperDual x) { return x.d1 != 0.0 || x.d2 != 0.0 || x.d12 != 0.0; }

inline bool all_finite(double x) { return std::isfinite(x); }
inline bool all_finite(Dual x) { return std::isfinite(x.value) && std::isfinite(x.deriv); }
inline bool all_finite(HyperDual x) {
  return std::isfinite(x.value) && std::isfinite(x.d1) && std::isfinite(x.d2) && std::isfinite(x.d12);
}

inline double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}
inline Dual divide(Dual a, Dual b) { return a / b; }
inline HyperDual divide(HyperDual a, HyperDual b) { return a / b; }

constexpr double chain(double, double f0, double, double) { return f0; }

// ---- elementary functions -----------------------------------------------------

template <class T>
T sin(T x) {
  const double v = primal(x);
  return chain(x, std::sin(v), std::cos(v), -std::sin(v));
}

template <class T>
T cos(T x) {
  const double v = primal(x);
  return chain(x, std::cos(v), -std::sin(v), -std::cos(v));
}

template <class T>
T tan(T x) {
  const double v = primal(x);
  const double c = std::cos(v);
  if (c == 0.0) throw DomainError("tan at a pole");
  const double t = std::tan(v);
  const double sec2 = 1.0 + t * t;
  return chain(x, t, sec2, 2.0 * t * sec2);
}

template <class T>
T exp(T x) {
  const double e = std::exp(primal(x));
  return chain(x, e, e, e);
}

template <class T>
T log(T x) {
  const double v = primal(x);
  if (!(v > 0.0)) throw DomainError("log of a nonpositive number");
  return chain(x, std::log(v), 1.0 / v, -1.0 / (v * v));
}

template <class T>
T sqrt(T x) {
  const double v = primal(x);
  if (v < 0.0) throw DomainError("sqrt of a negative number");
  if (v == 0.0) {
    if (has_derivative(x)) throw DomainError("sqrt is not differentiable at 0");
    return T(0.0);
  }
  const double s = std::sqrt(v);
  return chain(x, s, 0.5 / s, -0.25 / (s * v));
}

template <class T>
T abs(T x) {
  const double v = primal(x);
  if (v == 0.0) {
    if (has_derivative(x)) throw DomainError("abs is not differentiable at 0");
    return T(0.0);
  }
  const double sgn = v > 0.0 ? 1.0 : -1.0;
  return chain(x, std::abs(v), sgn, 0.0);
}

namespace detail {
inline bool is_integer(double p) { return std::isfinite(p) && p == std::floor(p) && std::abs(p) < 1e9; }
}  // namespace detail

/// base^exponent. A constant integer exponent accepts any base; a constant
/// fractional exponent needs base >= 0; a varying exponent needs base > 0.
template <class T>
T pow(T base, T exponent) {
  const double b = primal(base);
  const double p = primal(exponent);
  if (!has_derivative(exponent)) {
    if (b == 0.0 && p < 0.0) throw DomainError("division by zero in power");
    if (detail::is_integer(p)) {
      const double f0 = std::pow(b, p);
      const double f1 = p == 0.0 ? 0.0 : p * std::pow(b, p - 1.0);
      const double f2 = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(b, p - 2.0);
      return chain(base, f0, f1, f2);
    }
    if (b < 0.0) throw DomainError("fractional power of a negative number");
    if (b == 0.0) {
      if (has_derivative(base)) throw DomainError("fractional power is not differentiable at 0");
      return T(0.0);
    }
    return chain(base, std::pow(b, p), p * std::pow(b, p - 1.0), p * (p - 1.0) * std::pow(b, p - 2.0));
  }
  if (!(b > 0.0)) throw DomainError("variable exponent requires a positive base");
  return exp(exponent * log(base));
}

}  // namespace ad

/**
 * Type-erased real function of a fixed number of arguments that can be
 * evaluated over every member of the scalar family.
 */
class ScalarField {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual double eval(std::span<const double> x) const = 0;
    virtual ad::Dual eval(std::span<const ad::Dual> x) const = 0;
    virtual ad::HyperDual eval(std::span<const ad::HyperDual> x) const = 0;
  };

  ScalarField() = default;
  ScalarField(std::size_t arity, std::shared_ptr<const Impl> impl) : arity_(arity), impl_(std::move(impl)) {}

  /// Wraps a generic callable `fn(std::span<const T>) -> T`.
  template <class F>
  static ScalarField from_generic(std::size_t arity, F fn);

  static ScalarField constant(std::size_t arity, double c);

  std::size_t arity() const noexcept { return arity_; }
  bool valid() const noexcept { return impl_ != nullptr; }

  double operator()(std::span<const double> x) const { return impl_->eval(x); }
  ad::Dual operator()(std::span<const ad::Dual> x) const { return impl_->eval(x); }
  ad::HyperDual operator()(std::span<const ad::HyperDual> x) const { return impl_->eval(x); }
  double operator()(const Vector& x) const { return impl_->eval(std::span<const double>(x.data(), x.size())); }

 private:
  std::size_t arity_ = 0;
  std::shared_ptr<const Impl> impl_;
};

namespace detail {
template <class F>
struct GenericField final : ScalarField::Impl {
  explicit GenericField(F f) : fn(std::move(f)) {}
  double eval(std::span<const double> x) const override { return fn(x); }
  ad::Dual eval(std::span<const ad::Dual> x) const override { return fn(x); }
  ad::HyperDual eval(std::span<const ad::HyperDual> x) const override { return fn(x); }
  F fn;
};
}  // namespace detail

template <class F>
ScalarField ScalarField::from_generic(std::size_t arity, F fn) {
  return ScalarField(arity, std::make_shared<const detail::GenericField<F>>(std::move(fn)));
}

/// Value, gradient and full Hessian at one point.
struct SecondOrder {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// Gradient by one Dual pass per coordinate.
Vector grad(const ScalarField& fn, std::span<const double> point);
inline Vector grad(const ScalarField& fn, const Vector& point) {
  return grad(fn, std::span<const double>(point.data(), point.size()));
}

/// Single directional derivative along `direction`.
double directional(const ScalarField& fn, std::span<const double> point, std::span<const double> direction);

/// Block of second partials d2 fn / du_r du_c for r in rows, c in cols.
/// Computes one triangle and mirrors it when rows == cols, so the result is
/// exactly symmetric.
Matrix hessian_block(const ScalarField& fn, std::span<const double> point, std::span<const std::size_t> rows,
                     std::span<const std::size_t> cols);
inline Matrix hessian_block(const ScalarField& fn, const Vector& point, std::span<const std::size_t> rows,
                            std::span<const std::size_t> cols) {
  return hessian_block(fn, std::span<const double>(point.data(), point.size()), rows, cols);
}

SecondOrder second_order(const ScalarField& fn, std::span<const double> point);
inline SecondOrder second_order(const ScalarField& fn, const Vector& point) {
  return second_order(fn, std::span<const double>(point.data(), point.size()));
}

}  // namespace routh
