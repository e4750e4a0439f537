#include <gtest/gtest.h>

#include <random>

#include "builtin.hpp"
#include "oracles.hpp"
#include "routh/errors.hpp"
#include "routh/reduction.hpp"

using namespace routh;
using oracle::field;
using oracle::position_slots;
using oracle::rel_err;

namespace {

app::Scenario charged(double m, double e, double B, const Vector& mu) {
  auto doc = *app::builtin_scenario("charged_particle");
  doc["system"]["parameters"] = {{"m", m}, {"e", e}, {"B", B}};
  doc["mu"] = {mu(0), mu(1)};
  return app::load_scenario(doc);
}

double charged_routhian_closed_form(double m, double eB, const Vector& mu, double x, double y) {
  return -1.0 / (2.0 * m) * (std::pow(mu(0) - 2 * eB * y, 2) + std::pow(mu(1) + 2 * eB * x, 2));
}

SymmetrySpec strict(std::size_t n, std::vector<std::size_t> group) {
  return SymmetrySpec::strict(n, std::move(group), SampleBox::uniform(n));
}

/// Functional-mode data for L = 1/2 M qd.qd - W - V with M = [[1, c], [c, 1]],
/// phi = q2, lambda = -phi and V_fct = theta^2 / 2.
struct CoupledToy {
  double c;
  LagrangianSystem sys;
  FunctionalSpec fs;

  explicit CoupledToy(double coupling)
      : c(coupling),
        sys(oracle::system(2, "0.5*(qd1^2+2*c*qd1*qd2+qd2^2) - (-q2)*c*qd1 - (0.5*q1^2 - 0.5*q2^2)", {{"c", coupling}})) {
    const auto pos = position_slots(2);
    fs.phi_index = 1;
    fs.lambda = field("-q2", pos);
    fs.mass = {{ScalarField::constant(2, 1.0), ScalarField::constant(2, c)},
               {ScalarField::constant(2, c), ScalarField::constant(2, 1.0)}};
    fs.v_fct = field("0.5*q1^2", pos);
  }

  /// Direct substitution of phid = lambda - c thetad into L - lambda phid.
  double oracle(double theta, double thetad, double phi) const {
    const double lam = -phi;
    const double phid = lam - c * thetad;
    const double L = 0.5 * (thetad * thetad + 2 * c * thetad * phid + phid * phid) - lam * c * thetad -
                     (0.5 * theta * theta - 0.5 * lam * lam);
    return L - lam * phid;
  }
};

}  // namespace

TEST(Classify, Examples) {
  const auto cp = fixture::builtin("charged_particle");
  EXPECT_EQ(classify_case(*cp.system, *cp.symmetry, cocycle(*cp.system, *cp.symmetry)), ReductionCase::Magnetic);
  const auto fc = fixture::builtin("free_cyclic");
  EXPECT_EQ(classify_case(*fc.system, *fc.symmetry, cocycle(*fc.system, *fc.symmetry)), ReductionCase::StrictCyclic);
  const auto td = fixture::builtin("quasi_cyclic_totalderiv");
  EXPECT_EQ(classify_case(*td.system, *td.symmetry, cocycle(*td.system, *td.symmetry)), ReductionCase::QuasiCyclic);
  EXPECT_EQ(case_tag(ReductionCase::Functional), "D");
  EXPECT_EQ(case_name(ReductionCase::QuasiCyclic), "quasi_cyclic");
}

TEST(Classify, NondegenerateWithFewerDirectionsIsUnsupported) {
  const auto sys = oracle::system(3, "0.5*(qd1^2+qd2^2+qd3^2)+qd1*q2-qd2*q1");
  const auto pos = position_slots(3);
  const SymmetrySpec sym(3, {0, 1}, {field("-q2", pos), field("q1", pos)},
                         {{ScalarField::constant(3, 0.0)}, {ScalarField::constant(3, 0.0)}}, std::nullopt,
                         SampleBox::uniform(3));
  EXPECT_TRUE(check_quasi_invariance(sys, sym).passed);
  try {
    classify_case(sys, sym, cocycle(sys, sym));
    FAIL() << "expected UnsupportedCaseError";
  } catch (const UnsupportedCaseError& e) {
    EXPECT_NE(std::string(e.what()).find("rank 2"), std::string::npos);
  }
}

TEST(Classify, DegenerateNonzeroIsUnsupported) {
  const auto sys = oracle::system(3, "0.5*(qd1^2+qd2^2+qd3^2)+qd1*q2-qd2*q1");
  const auto pos = position_slots(3);
  const SymmetrySpec sym(3, {0, 1, 2}, {field("-q2", pos), field("q1", pos), field("0", pos)},
                         std::vector<std::vector<ScalarField>>(3), std::nullopt, SampleBox::uniform(3));
  EXPECT_THROW(classify_case(sys, sym, cocycle(sys, sym)), UnsupportedCaseError);
}

TEST(SolveVelocity, LinearCases) {
  const auto free = oracle::system(2, "0.5*(qd1^2+qd2^2)");
  EXPECT_DOUBLE_EQ(solve_velocity(free, strict(2, {0}), Vector{{0.3}}, Vector{{0.7}}, {Vector{{1.0}}})(0), 1.0);
  const auto scaled = oracle::system(1, "0.5*a*qd1^2", {{"a", 4.0}});
  const SymmetrySpec one = SymmetrySpec::strict(1, {0}, SampleBox::uniform(1));
  EXPECT_DOUBLE_EQ(solve_velocity(scaled, one, Vector{{0.0}}, Vector(0), {Vector{{3.0}}})(0), 0.75);
}

TEST(SolveVelocity, NonlinearMatchesBisection) {
  // dL/dqd1 = qd1 + qd1^3
  const auto sys = oracle::system(2, "0.5*qd1^2 + 0.25*qd1^4 + 0.5*qd2^2");
  for (double mu : {2.0, 0.3, -5.0, 10.0}) {
    const double psi = solve_velocity(sys, strict(2, {0}), Vector{{0.0}}, Vector{{0.0}}, {Vector{{mu}}})(0);
    const double root = oracle::bisect([&](double v) { return v + v * v * v - mu; }, -10.0, 10.0);
    EXPECT_NEAR(psi, root, 1e-12) << "mu " << mu;
    EXPECT_LE(std::abs(psi + psi * psi * psi - mu), 1e-12 * (1 + std::abs(mu)));
  }
}

TEST(SolveVelocity, SingularHessianIsRegularityError) {
  EXPECT_THROW(solve_velocity(oracle::system(2, "qd1 + 0.5*qd2^2"), strict(2, {0}), Vector{{0.0}}, Vector{{0.0}},
                              {Vector{{2.0}}}),
               RegularityError);
}

TEST(SolveVelocity, UnreachableMomentumIsConvergenceError) {
  // dL/dqd1 = (qd1 - 1)^2 + 1 never reaches 0.5
  EXPECT_THROW(solve_velocity(oracle::system(2, "(qd1-1)^3/3 + qd1 + 0.5*qd2^2"), strict(2, {0}), Vector{{0.0}},
                              Vector{{0.0}}, {Vector{{0.5}}}),
               ConvergenceError);
}

TEST(SolveVelocity, MomentumRelationHoldsOnBuiltins) {
  std::mt19937_64 rng(3);
  for (const char* name : {"quasi_cyclic_totalderiv", "curved_gamma", "charged_particle"}) {
    const auto sc = fixture::builtin(name);
    const auto& sym = *sc.symmetry;
    for (int k = 0; k < 20; ++k) {
      const bool full = sym.m() == sym.n();
      const Vector x = oracle::uniform(rng, static_cast<Eigen::Index>(full ? sym.n() : sym.shape_dim()));
      const Vector xd = full ? Vector(0) : oracle::uniform(rng, x.size());
      const Vector theta = oracle::uniform(rng, static_cast<Eigen::Index>(sym.m()));
      const Vector psi = solve_velocity(*sc.system, sym, x, xd, sc.mu, theta);
      // rebuild the full state by hand and check momentum = mu
      State s;
      s.q = Vector(sym.n());
      s.qd = Vector(sym.n());
      for (std::size_t a = 0; a < sym.m(); ++a) {
        s.q(sym.group_indices()[a]) = full ? x(sym.group_indices()[a]) : theta(a);
        s.qd(sym.group_indices()[a]) = psi(a);
      }
      for (std::size_t k2 = 0; k2 < sym.shape_dim(); ++k2) {
        s.q(sym.shape_indices()[k2]) = x(k2);
        s.qd(sym.shape_indices()[k2]) = xd(k2);
      }
      EXPECT_LE((momentum(*sc.system, sym, s).mu - sc.mu.mu).cwiseAbs().maxCoeff(), 1e-11) << name;
    }
  }
}

TEST(Routhian, FreeParticle) {
  const auto sc = fixture::builtin("free_cyclic");
  EXPECT_DOUBLE_EQ(routhian(*sc.system, *sc.symmetry, Vector{{0.0}}, Vector{{2.0}}, sc.mu), 1.5);
  const auto g = routhian_grad(*sc.system, *sc.symmetry, Vector{{0.4}}, Vector{{-1.25}}, sc.mu);
  EXPECT_DOUBLE_EQ(g.dxd(0), -1.25);
  EXPECT_DOUBLE_EQ(g.dx(0), 0.0);
}

TEST(Routhian, ChargedParticleClosedForm) {
  const auto sc = charged(1, 1, 1, Vector{{1.0, 0.0}});
  EXPECT_DOUBLE_EQ(routhian(*sc.system, *sc.symmetry, Vector{{0.0, 0.0}}, Vector(0), sc.mu), -0.5);
  const auto g = routhian_grad(*sc.system, *sc.symmetry, Vector{{0.0, 0.0}}, Vector(0), sc.mu);
  EXPECT_NEAR(g.dx(0), 0.0, 1e-15);
  EXPECT_NEAR(g.dx(1), 2.0, 1e-15);

  std::mt19937_64 rng(41);
  const Vector mu = oracle::uniform(rng, 2, -2, 2);
  const auto sc2 = charged(2.0, 0.5, 3.0, mu);
  for (int k = 0; k < 100; ++k) {
    const Vector p = oracle::uniform(rng, 2);
    const double r = routhian(*sc2.system, *sc2.symmetry, p, Vector(0), sc2.mu);
    EXPECT_LE(rel_err(r, charged_routhian_closed_form(2.0, 1.5, mu, p(0), p(1))), 1e-12);
  }
}

TEST(Routhian, TotalDerivativeSubstitutionOracle) {
  const auto sc = fixture::builtin("quasi_cyclic_totalderiv");
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const double x = std::uniform_real_distribution<double>(-1, 1)(rng);
    const double xd = std::uniform_real_distribution<double>(-1, 1)(rng);
    const double mu = k == 0 ? 0.0 : std::uniform_real_distribution<double>(-2, 2)(rng);
    const double q1 = 0.0;
    const double f = std::exp(q1 - x);
    const double psi = oracle::bisect([&](double v) { return v + std::exp(q1 - x) - f - mu; }, -10, 10);
    const double L = 0.5 * (psi * psi + xd * xd) + (psi - xd) * std::exp(q1 - x);
    const double expected = L - (mu + f) * (psi - xd);
    const double r = routhian(*sc.system, *sc.symmetry, Vector{{x}}, Vector{{xd}}, {Vector{{mu}}});
    EXPECT_NEAR(r, expected, 1e-12);
    if (k == 0) EXPECT_NEAR(routhian(*sc.system, *sc.symmetry, Vector{{0.0}}, Vector{{0.0}}, {Vector{{0.0}}}), 0.0, 1e-15);
  }
}

TEST(RouthianGrad, MatchesFiniteDifferencesOnBuiltins) {
  std::mt19937_64 rng(12);
  for (const char* name : fixture::kBuiltins) {
    const auto sc = fixture::builtin(name);
    const ReducedSystem red = fixture::reduced(sc);
    const auto d = static_cast<Eigen::Index>(red.shape_dim());
    const bool first = red.first_order();
    for (int k = 0; k < 100; ++k) {
      const Vector x = oracle::uniform(rng, d);
      const Vector xd = first ? Vector(0) : oracle::uniform(rng, d);
      const RouthianGradient g = red.routhian_grad(x, xd);
      const Vector fd_x = oracle::fd_gradient([&](const Vector& p) { return red.routhian(p, xd); }, x);
      EXPECT_LE(rel_err(g.dx, fd_x), 1e-6) << name;
      if (!first) {
        const Vector fd_v = oracle::fd_gradient([&](const Vector& p) { return red.routhian(x, p); }, xd);
        EXPECT_LE(rel_err(g.dxd, fd_v), 1e-6) << name;
      }
    }
  }
}

TEST(GyroscopicForm, Examples) {
  const auto cp = fixture::builtin("charged_particle");
  Matrix expected(2, 2);
  expected << 0, 2, -2, 0;
  EXPECT_TRUE(gyroscopic_form(*cp.system, *cp.symmetry, ReductionCase::Magnetic, Vector{{0.3, -0.2}}, cp.mu) ==
              expected);

  const auto td = fixture::builtin("quasi_cyclic_totalderiv");
  EXPECT_TRUE(gyroscopic_form(*td.system, *td.symmetry, ReductionCase::QuasiCyclic, Vector{{0.4}}, td.mu).isZero(0.0));

  const auto cg = fixture::builtin("curved_gamma");
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Matrix b = gyroscopic_form(*cg.system, *cg.symmetry, ReductionCase::StrictCyclic, oracle::uniform(rng, 2), cg.mu);
    EXPECT_TRUE(b == -b.transpose());
    EXPECT_DOUBLE_EQ(std::abs(b(0, 1)), 1.0);
  }
}

TEST(GyroscopicForm, AntisymmetricEverywhere) {
  std::mt19937_64 rng(77);
  for (const char* name : fixture::kBuiltins) {
    const ReducedSystem red = fixture::reduced(fixture::builtin(name));
    for (int k = 0; k < 20; ++k) {
      const Matrix b = red.gyro(oracle::uniform(rng, static_cast<Eigen::Index>(red.shape_dim())));
      EXPECT_TRUE(b == -b.transpose()) << name;
    }
  }
}

TEST(Routhian, IndependentOfGroupCoordinateInCaseB) {
  const auto sc = fixture::builtin("quasi_cyclic_totalderiv");
  std::mt19937_64 rng(21);
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::uniform(rng, 1), xd = oracle::uniform(rng, 1);
    const double r0 = routhian(*sc.system, *sc.symmetry, x, xd, sc.mu, Vector{{0.0}});
    for (double s : {-3.0, -0.5, 1.0, 4.0})
      EXPECT_LE(std::abs(routhian(*sc.system, *sc.symmetry, x, xd, sc.mu, Vector{{s}}) - r0), 1e-9);
  }
}

TEST(Reduce, BuildsEveryBuiltin) {
  const ReductionCase expected[] = {ReductionCase::Magnetic, ReductionCase::StrictCyclic, ReductionCase::QuasiCyclic,
                                    ReductionCase::StrictCyclic, ReductionCase::Functional};
  for (int i = 0; i < 5; ++i) {
    const ReducedSystem red = fixture::reduced(fixture::builtin(fixture::kBuiltins[i]));
    EXPECT_EQ(red.reduction_case(), expected[i]) << fixture::kBuiltins[i];
  }
  const ReducedSystem cp = fixture::reduced(fixture::builtin("charged_particle"));
  EXPECT_TRUE(cp.first_order());
  EXPECT_EQ(cp.shape_dim(), 2u);
  const ReducedSystem cg = fixture::reduced(fixture::builtin("curved_gamma"));
  EXPECT_EQ(cg.position_indices(), (std::vector<std::size_t>{1, 2}));
}

TEST(Reduce, NonConstantCocycleIsUnsupported) {
  const auto pos = position_slots(2);
  const SymmetrySpec sym(2, {0, 1}, {field("q2^2", pos), field("0", pos)}, std::vector<std::vector<ScalarField>>(2),
                         std::nullopt, SampleBox::uniform(2));
  EXPECT_THROW(reduce(oracle::system(2, "0.5*(qd1^2+qd2^2)"), sym, {Vector{{0.0, 0.0}}}), UnsupportedCaseError);
}

TEST(Functional, ToyRouthianOnLevelSet) {
  const auto sc = fixture::builtin("functional_toy");
  for (double phi : {-1.0, 0.0, 0.4, 2.0})
    for (double theta : {-0.7, 0.0, 0.5})
      EXPECT_NEAR(functional_routhian(*sc.system, *sc.functional, Vector{{theta}}, Vector{{0.0}}, phi),
                  -0.5 * theta * theta, 1e-15);
}

TEST(Functional, CoupledMassMatchesSubstitutionOracle) {
  std::mt19937_64 rng(4);
  for (double c : {0.3, -0.6}) {
    const CoupledToy toy(c);
    EXPECT_TRUE(check_functional_consistency(toy.sys, toy.fs, SampleBox::uniform(2)).passed);
    EXPECT_TRUE(check_functional_structure(toy.sys, toy.fs, SampleBox::uniform(2)).passed);
    EXPECT_TRUE(check_phi_independence(toy.sys, toy.fs, SampleBox::uniform(2)).passed);
    EXPECT_TRUE(check_level_set_quasi_invariance(toy.sys, toy.fs, SampleBox::uniform(2)).passed);
    for (int k = 0; k < 30; ++k) {
      const Vector z = oracle::uniform(rng, 3);
      EXPECT_NEAR(functional_routhian(toy.sys, toy.fs, Vector{{z(0)}}, Vector{{z(1)}}, z(2)),
                  toy.oracle(z(0), z(1), z(2)), 1e-14);
    }
  }
}

TEST(Functional, ZeroShiftIsClassicRouth) {
  const auto sys = oracle::system(2, "0.5*(qd1^2+2*qd2^2) - 0.5*q1^2");
  const auto pos = position_slots(2);
  FunctionalSpec fs;
  fs.phi_index = 1;
  fs.lambda = ScalarField::constant(2, 0.0);
  fs.mass = {{ScalarField::constant(2, 1.0), ScalarField::constant(2, 0.0)},
             {ScalarField::constant(2, 0.0), ScalarField::constant(2, 2.0)}};
  fs.v_fct = field("0.5*q1^2", pos);
  const SymmetrySpec sym = SymmetrySpec::strict(2, {1}, SampleBox::uniform(2));
  std::mt19937_64 rng(6);
  for (int k = 0; k < 20; ++k) {
    const Vector z = oracle::uniform(rng, 2);
    EXPECT_NEAR(functional_routhian(sys, fs, Vector{{z(0)}}, Vector{{z(1)}}),
                routhian(sys, sym, Vector{{z(0)}}, Vector{{z(1)}}, {Vector{{0.0}}}), 1e-15);
  }
}

TEST(Functional, Momentum) {
  const auto sc = fixture::builtin("functional_toy");
  const auto J = [&](double phi, double phid) {
    return functional_momentum(*sc.system, *sc.functional, State{0.0, Vector{{0.2, phi}}, Vector{{0.9, phid}}});
  };
  EXPECT_EQ(J(0.35, -0.35), 0.0);
  EXPECT_EQ(J(1.0, 0.0), 1.0);
  const auto classic = oracle::system(2, "0.5*(qd1^2+qd2^2)");
  FunctionalSpec fs = *sc.functional;
  fs.lambda = ScalarField::constant(2, 0.0);
  EXPECT_EQ(functional_momentum(classic, fs, State{0.0, Vector{{0.2, 0.1}}, Vector{{0.9, 0.0}}}), 0.0);
}

TEST(Functional, SingularPhiMassIsRegularityError) {
  auto sc = fixture::builtin("functional_toy");
  FunctionalSpec fs = *sc.functional;
  fs.mass[1][1] = ScalarField::constant(2, 0.0);
  EXPECT_THROW(functional_routhian(*sc.system, fs, Vector{{0.1}}, Vector{{0.1}}), RegularityError);
}

TEST(Functional, ReducedSystemAgreesWithClosedForm) {
  const auto sc = fixture::builtin("functional_toy");
  const ReducedSystem red = fixture::reduced(sc);
  std::mt19937_64 rng(10);
  for (int k = 0; k < 30; ++k) {
    const Vector z = oracle::uniform(rng, 2);
    EXPECT_NEAR(red.routhian(Vector{{z(0)}}, Vector{{z(1)}}),
                functional_routhian(*sc.system, *sc.functional, Vector{{z(0)}}, Vector{{z(1)}}), 1e-12);
  }
  EXPECT_THROW(reduce_functional(*sc.system, *sc.functional, sc.box, {Vector{{0.5}}}), UnsupportedCaseError);
}

TEST(Flatness, CaseBHasZeroCurvatureAndGyro) {
  const auto sc = fixture::builtin("quasi_cyclic_totalderiv");
  const auto cc = check_connection_condition(*sc.system, *sc.symmetry, sc.checks);
  ASSERT_TRUE(cc.connection.passed);
  EXPECT_LE(cc.curvature.residual, 1e-8);
  const ReducedSystem red = fixture::reduced(sc);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) EXPECT_LE(red.gyro(oracle::uniform(rng, 1)).cwiseAbs().maxCoeff(), 1e-10);
}
