#include "routh/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace routh {

SampleBox SampleBox::uniform(std::size_t n, double lo, double hi) {
  SampleBox b;
  b.q.assign(n, Interval{lo, hi});
  b.qd.assign(n, Interval{lo, hi});
  return b;
}

Vector pack(const Vector& q, const Vector& qd) {
  Vector z(q.size() + qd.size());
  z << q, qd;
  return z;
}

LagrangianSystem::LagrangianSystem(std::size_t n, ScalarField lagrangian, std::map<std::string, double> parameters,
                                   std::vector<std::string> coordinate_names)
    : n_(n), lagrangian_(std::move(lagrangian)), parameters_(std::move(parameters)), names_(std::move(coordinate_names)) {
  if (n_ == 0) throw InputError("system dimension must be positive");
  if (!lagrangian_.valid() || lagrangian_.arity() != 2 * n_)
    throw InputError("Lagrangian must take 2n = " + std::to_string(2 * n_) + " arguments");
  if (names_.empty()) {
    for (std::size_t i = 0; i < n_; ++i) names_.push_back("q" + std::to_string(i + 1));
  } else if (names_.size() != n_) {
    throw InputError("coordinate_names must have n entries");
  }
}

SymmetrySpec::SymmetrySpec(std::size_t n, std::vector<std::size_t> group_indices, std::vector<ScalarField> f,
                           std::vector<std::vector<ScalarField>> gamma,
                           std::optional<std::vector<ScalarField>> finite_cocycle, SampleBox box)
    : n_(n),
      group_(std::move(group_indices)),
      f_(std::move(f)),
      gamma_(std::move(gamma)),
      finite_(std::move(finite_cocycle)),
      box_(std::move(box)) {
  if (group_.empty() || group_.size() > n_) throw InputError("need between 1 and n group directions");
  std::vector<bool> used(n_, false);
  for (std::size_t idx : group_) {
    if (idx >= n_) throw InputError("group index " + std::to_string(idx + 1) + " out of range");
    if (used[idx]) throw InputError("group index " + std::to_string(idx + 1) + " repeated");
    used[idx] = true;
  }
  for (std::size_t i = 0; i < n_; ++i)
    if (!used[i]) shape_.push_back(i);

  const std::size_t m = group_.size();
  if (f_.size() != m) throw InputError("need one f per group direction");
  for (const auto& fa : f_)
    if (!fa.valid() || fa.arity() != n_) throw InputError("f must take the n positions");
  if (gamma_.size() != m) throw InputError("gamma must have one row per group direction");
  for (const auto& row : gamma_) {
    if (row.size() != shape_.size()) throw InputError("gamma rows must have n - m entries");
    for (const auto& g : row)
      if (!g.valid() || g.arity() != n_) throw InputError("gamma entries must take the n positions");
  }
  if (finite_) {
    if (finite_->size() != m) throw InputError("need one F per group direction");
    for (const auto& fa : *finite_)
      if (!fa.valid() || fa.arity() != n_ + 1) throw InputError("F must take (q_1..q_n, s)");
  }
  if (box_.q.size() != n_ || box_.qd.size() != n_) throw InputError("sample box must cover every coordinate");
}

SymmetrySpec SymmetrySpec::strict(std::size_t n, std::vector<std::size_t> group_indices, SampleBox box) {
  const std::size_t m = group_indices.size();
  std::vector<ScalarField> f(m, ScalarField::constant(n, 0.0));
  std::vector<std::vector<ScalarField>> gamma(m, std::vector<ScalarField>(n - std::min(m, n), ScalarField::constant(n, 0.0)));
  return SymmetrySpec(n, std::move(group_indices), std::move(f), std::move(gamma), std::nullopt, std::move(box));
}

Vector SymmetrySpec::shift(const Vector& q) const {
  Vector out(static_cast<Eigen::Index>(m()));
  for (std::size_t a = 0; a < m(); ++a) out[static_cast<Eigen::Index>(a)] = f_[a](q);
  return out;
}

Matrix SymmetrySpec::shift_jacobian(const Vector& q) const {
  Matrix j(static_cast<Eigen::Index>(m()), static_cast<Eigen::Index>(n_));
  for (std::size_t a = 0; a < m(); ++a) j.row(static_cast<Eigen::Index>(a)) = grad(f_[a], q).transpose();
  return j;
}

Matrix SymmetrySpec::gamma_matrix(const Vector& q) const {
  Matrix g(static_cast<Eigen::Index>(m()), static_cast<Eigen::Index>(shape_dim()));
  for (std::size_t a = 0; a < m(); ++a)
    for (std::size_t k = 0; k < shape_dim(); ++k)
      g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = gamma_[a][k](q);
  return g;
}

bool VerificationReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.passed; });
}

const ReportEntry* VerificationReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

double radical_inverse(std::size_t index, std::size_t base) {
  double result = 0.0;
  double scale = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= static_cast<double>(base);
  }
  return result;
}

std::vector<std::size_t> first_primes(std::size_t count) {
  std::vector<std::size_t> primes;
  for (std::size_t c = 2; primes.size() < count; ++c) {
    const bool prime = std::none_of(primes.begin(), primes.end(), [c](std::size_t p) { return c % p == 0; });
    if (prime) primes.push_back(c);
  }
  return primes;
}

// Runs `fn` at every sample, keeping the worst residual. An evaluation error or
// a NaN residual fails the entry at that point.
template <class Fn>
ReportEntry sample_max(std::string name, const std::vector<Vector>& points, double tolerance, Fn fn) {
  ReportEntry e;
  e.name = std::move(name);
  e.tolerance = tolerance;
  double worst = 0.0;
  for (const Vector& z : points) {
    double r = 0.0;
    try {
      r = fn(z);
    } catch (const Error& err) {
      e.residual = std::numeric_limits<double>::quiet_NaN();
      e.passed = false;
      e.worst_point.assign(z.data(), z.data() + z.size());
      e.message = err.what();
      return e;
    }
    if (std::isnan(r)) {
      e.residual = r;
      e.passed = false;
      e.worst_point.assign(z.data(), z.data() + z.size());
      e.message = "residual is NaN";
      return e;
    }
    if (r > worst || e.worst_point.empty()) {
      worst = r;
      e.worst_point.assign(z.data(), z.data() + z.size());
    }
  }
  e.residual = worst;
  e.passed = worst <= tolerance;
  return e;
}

struct Split {
  Vector q;
  Vector qd;
};

Split split(const Vector& z, std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  return {z.head(nn), z.tail(nn)};
}

}  // namespace

std::vector<Vector> halton_points(const SampleBox& box, std::size_t count) {
  const std::size_t n = box.q.size();
  const std::size_t dim = 2 * n;
  const auto primes = first_primes(dim);
  std::vector<Vector> pts;
  pts.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    Vector z(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
      const Interval& iv = d < n ? box.q[d] : box.qd[d - n];
      z[static_cast<Eigen::Index>(d)] = iv.lo + radical_inverse(i, primes[d]) * (iv.hi - iv.lo);
    }
    pts.push_back(std::move(z));
  }
  return pts;
}

ReportEntry check_quasi_invariance(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts) {
  const std::size_t n = sys.n();
  return sample_max("quasi_invariance", halton_points(sym.box(), opts.samples), opts.tolerance, [&](const Vector& z) {
    const auto [q, qd] = split(z, n);
    const Vector dl = grad(sys.lagrangian(), z);
    double worst = 0.0;
    for (std::size_t a = 0; a < sym.m(); ++a) {
      const Vector df = grad(sym.f(a), q);
      const double defect = dl[static_cast<Eigen::Index>(sym.group_indices()[a])] - qd.dot(df);
      worst = std::max(worst, std::abs(defect));
    }
    return worst;
  });
}

ReportEntry check_finite_cocycle(const LagrangianSystem& sys, const SymmetrySpec& sym, const Vector& g,
                                 const CheckOptions& opts) {
  if (!sym.finite_cocycle()) throw UnsupportedCheckError("finite cocycle check needs F");
  if (static_cast<std::size_t>(g.size()) != sym.m()) throw InputError("group element must have m components");
  const std::size_t n = sys.n();
  const auto& finite = *sym.finite_cocycle();
  return sample_max("finite_cocycle", halton_points(sym.box(), opts.samples), opts.tolerance, [&](const Vector& z) {
    const auto [q, qd] = split(z, n);
    Vector shifted = q;
    double contraction = 0.0;
    std::vector<double> arg(n + 1);
    std::vector<double> dir(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) dir[i] = qd[static_cast<Eigen::Index>(i)];
    for (std::size_t a = 0; a < sym.m(); ++a) {
      for (std::size_t i = 0; i < n; ++i) arg[i] = shifted[static_cast<Eigen::Index>(i)];
      arg[n] = g[static_cast<Eigen::Index>(a)];
      contraction += directional(finite[a], arg, dir);
      shifted[static_cast<Eigen::Index>(sym.group_indices()[a])] += g[static_cast<Eigen::Index>(a)];
    }
    return std::abs(sys.value(shifted, qd) - sys.value(q, qd) - contraction);
  });
}

ReportEntry check_G_regularity(const LagrangianSystem& sys, const SymmetrySpec& sym, const CheckOptions& opts) {
  constexpr double kMinScaledDet = 1e-10;
  const std::size_t n = sys.n();
  std::vector<std::size_t> vel;
  for (std::size_t a : sym.group_indices()) vel.push_back(n + a);
  return sample_max("G_regularity", halton_points(sym.box(), opts.samples), 0.0, [&](const Vector& z) {
    const Matrix h = hessian_block(sys.lagrangian(), z, vel, vel);
    double scale = 1.0;
    for (Eigen::Index r = 0; r < h.rows(); ++r) scale *= h.row(r).norm();
    const double scaled = scale > 0.0 ? std::abs(h.determinant()) / scale : 0.0;
    return std::max(0.0, kMinScaledDet - scaled);
  });
}

ReportEntry check_gamma_shape_only(const LagrangianSystem&, const SymmetrySpec& sym, const CheckOptions& opts) {
  const std::size_t n = sym.n();
  return sample_max("gamma_shape_only", halton_points(sym.box(), opts.samples), opts.tolerance, [&](const Vector& z) {
    const Vector q = z.head(static_cast<Eigen::Index>(n));
    double worst = 0.0;
    for (std::size_t a = 0; a < sym.m(); ++a)
      for (std::size_t k = 0; k < sym.shape_dim(); ++k) {
        const Vector dg = grad(sym.gamma(a, k), q);
        for (std::size_t b : sym.group_indices()) worst = std::max(worst, std::abs(dg[static_cast<Eigen::Index>(b)]));
      }
    return worst;
  });
}

ConnectionCheck check_connection_condition(const LagrangianSystem&, const SymmetrySpec& sym, const CheckOptions& opts) {
  const std::size_t n = sym.n();
  const auto pts = halton_points(sym.box(), opts.samples);
  const auto& shape = sym.shape_indices();
  const auto& group = sym.group_indices();

  ConnectionCheck out;
  out.connection = sample_max("connection_condition", pts, opts.tolerance, [&](const Vector& z) {
    const Vector q = z.head(static_cast<Eigen::Index>(n));
    const Matrix df = sym.shift_jacobian(q);
    const Matrix gam = sym.gamma_matrix(q);
    double worst = 0.0;
    for (std::size_t a = 0; a < sym.m(); ++a)
      for (std::size_t k = 0; k < shape.size(); ++k) {
        double horizontal = df(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(shape[k]));
        for (std::size_t b = 0; b < sym.m(); ++b)
          horizontal -= gam(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k)) *
                        df(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(group[b]));
        worst = std::max(worst, std::abs(horizontal));
      }
    return worst;
  });
  out.curvature = sample_max("curvature", pts, opts.tolerance, [&](const Vector& z) {
    const Vector q = z.head(static_cast<Eigen::Index>(n));
    double worst = 0.0;
    if (shape.empty()) return worst;
    for (std::size_t a = 0; a < sym.m(); ++a) {
      Matrix dgam(static_cast<Eigen::Index>(shape.size()), static_cast<Eigen::Index>(shape.size()));
      for (std::size_t s = 0; s < shape.size(); ++s) {
        const Vector g = grad(sym.gamma(a, s), q);
        for (std::size_t k = 0; k < shape.size(); ++k)
          dgam(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) = g[static_cast<Eigen::Index>(shape[k])];
      }
      // dgam(k, s) = dGamma_s / dx^k
      worst = std::max(worst, (dgam - dgam.transpose()).cwiseAbs().maxCoeff());
    }
    return worst;
  });
  return out;
}

CocycleMatrix cocycle(const LagrangianSystem&, const SymmetrySpec& sym, const CheckOptions& opts) {
  const std::size_t n = sym.n();
  const auto m = static_cast<Eigen::Index>(sym.m());
  const auto pts = halton_points(sym.box(), opts.samples);
  std::vector<Matrix> samples;
  samples.reserve(pts.size());
  Matrix mean = Matrix::Zero(m, m);
  for (const Vector& z : pts) {
    const Matrix df = sym.shift_jacobian(z.head(static_cast<Eigen::Index>(n)));
    Matrix s(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b)
        s(a, b) = df(b, static_cast<Eigen::Index>(sym.group_indices()[static_cast<std::size_t>(a)])) -
                  df(a, static_cast<Eigen::Index>(sym.group_indices()[static_cast<std::size_t>(b)]));
    mean += s;
    samples.push_back(std::move(s));
  }
  CocycleMatrix c;
  c.sigma = samples.empty() ? mean : Matrix(mean / static_cast<double>(samples.size()));
  // exact antisymmetry
  c.sigma = 0.5 * (c.sigma - c.sigma.transpose()).eval();
  for (const Matrix& s : samples) c.constancy_residual = std::max(c.constancy_residual, (s - c.sigma).cwiseAbs().maxCoeff());
  return c;
}

ReportEntry check_cocycle_constancy(const CocycleMatrix& c, const CheckOptions& opts) {
  ReportEntry e;
  e.name = "cocycle_constancy";
  e.residual = c.constancy_residual;
  e.tolerance = opts.tolerance;
  e.passed = c.constancy_residual <= opts.tolerance;
  return e;
}

bool shift_vanishes(const LagrangianSystem&, const SymmetrySpec& sym, const CheckOptions& opts) {
  const auto n = static_cast<Eigen::Index>(sym.n());
  for (const Vector& z : halton_points(sym.box(), opts.samples))
    if (sym.shift(z.head(n)).cwiseAbs().maxCoeff() > opts.tolerance) return false;
  return true;
}

MomentumValue momentum(const LagrangianSystem& sys, const SymmetrySpec& sym, const State& s) {
  const std::size_t n = sys.n();
  const Vector z = pack(s.q, s.qd);
  std::vector<double> dir(2 * n, 0.0);
  MomentumValue out{Vector(static_cast<Eigen::Index>(sym.m()))};
  const Vector f = sym.shift(s.q);
  for (std::size_t a = 0; a < sym.m(); ++a) {
    const std::size_t slot = n + sym.group_indices()[a];
    dir[slot] = 1.0;
    out.mu[static_cast<Eigen::Index>(a)] =
        directional(sys.lagrangian(), std::span<const double>(z.data(), z.size()), dir) - f[static_cast<Eigen::Index>(a)];
    dir[slot] = 0.0;
  }
  return out;
}

double energy(const LagrangianSystem& sys, const State& s) {
  const std::size_t n = sys.n();
  const Vector z = pack(s.q, s.qd);
  std::vector<ad::Dual> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ad::Dual(s.q[static_cast<Eigen::Index>(i)]);
    x[n + i] = ad::Dual(s.qd[static_cast<Eigen::Index>(i)], s.qd[static_cast<Eigen::Index>(i)]);
  }
  const ad::Dual l = sys.lagrangian()(std::span<const ad::Dual>(x));
  return l.deriv - l.value;
}

}  // namespace routh
