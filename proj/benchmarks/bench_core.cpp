#include <benchmark/benchmark.h>

#include "routh/app/scenario.hpp"
#include "routh/dynamics.hpp"
#include "routh/expr.hpp"
#include "routh/reduction.hpp"

using namespace routh;

namespace {

app::Scenario builtin(const std::string& name) { return app::load_scenario(*app::builtin_scenario(name)); }

ReducedSystem reduced(const app::Scenario& sc) {
  if (sc.functional_mode()) return reduce_functional(*sc.system, *sc.functional, sc.box, sc.mu);
  return reduce(*sc.system, *sc.symmetry, sc.mu, sc.checks);
}

const char* const kLagrangian = "0.5*(qd1+q2*qd3)^2+0.5*(qd2^2+qd3^2)-0.5*(q2^2+q3^2)";

ScalarField curved_field() {
  const std::vector<std::string> slots{"q1", "q2", "q3", "qd1", "qd2", "qd3"};
  const expr::NameSet vars(slots.begin(), slots.end());
  return expr::bind(expr::parse(kLagrangian, vars, {}), slots, {});
}

const Vector kPoint{{0.1, 0.5, -0.2, 0.85, 0.1, 0.3}};

}  // namespace

static void BM_Parse(benchmark::State& state) {
  const expr::NameSet vars{"q1", "q2", "q3", "qd1", "qd2", "qd3"};
  for (auto _ : state) benchmark::DoNotOptimize(expr::parse(kLagrangian, vars, {}));
}
BENCHMARK(BM_Parse);

static void BM_EvalDouble(benchmark::State& state) {
  const ScalarField f = curved_field();
  for (auto _ : state) benchmark::DoNotOptimize(f(kPoint));
}
BENCHMARK(BM_EvalDouble);

static void BM_Gradient(benchmark::State& state) {
  const ScalarField f = curved_field();
  for (auto _ : state) benchmark::DoNotOptimize(grad(f, kPoint));
}
BENCHMARK(BM_Gradient);

static void BM_SecondOrder(benchmark::State& state) {
  const ScalarField f = curved_field();
  for (auto _ : state) benchmark::DoNotOptimize(second_order(f, kPoint));
}
BENCHMARK(BM_SecondOrder);

static void BM_FullRhs(benchmark::State& state) {
  const auto sc = builtin("curved_gamma");
  const State s{0.0, kPoint.head(3), kPoint.tail(3)};
  for (auto _ : state) benchmark::DoNotOptimize(full_el_rhs(*sc.system, s));
}
BENCHMARK(BM_FullRhs);

static void BM_ReducedRhs(benchmark::State& state) {
  const auto sc = builtin("curved_gamma");
  const auto red = reduced(sc);
  const Vector x{{0.5, -0.2}}, xd{{0.1, 0.3}};
  for (auto _ : state) benchmark::DoNotOptimize(reduced_el_rhs(red, x, xd));
}
BENCHMARK(BM_ReducedRhs);

static void BM_MagneticRhs(benchmark::State& state) {
  const auto red = reduced(builtin("charged_particle"));
  const Vector x{{0.3, -0.4}};
  for (auto _ : state) benchmark::DoNotOptimize(magnetic_flow_rhs(red, x));
}
BENCHMARK(BM_MagneticRhs);

static void BM_Routhian(benchmark::State& state) {
  const auto red = reduced(builtin("quasi_cyclic_totalderiv"));
  const Vector x{{0.2}}, xd{{0.3}};
  for (auto _ : state) benchmark::DoNotOptimize(red.routhian(x, xd));
}
BENCHMARK(BM_Routhian);

static void BM_FullStep(benchmark::State& state) {
  const auto sc = builtin("curved_gamma");
  const Flow flow = full_flow(*sc.system, *sc.symmetry);
  const Vector y0 = pack(sc.initial.q, sc.initial.qd);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(flow, y0, 0.0, 1e-3, 1));
}
BENCHMARK(BM_FullStep);

static void BM_ReducedStep(benchmark::State& state) {
  const auto red = reduced(builtin("curved_gamma"));
  const Flow flow = reduced_flow(red);
  const Vector y0{{0.5, 0.0, 0.0, 0.3}};
  for (auto _ : state) benchmark::DoNotOptimize(integrate(flow, y0, 0.0, 1e-3, 1));
}
BENCHMARK(BM_ReducedStep);

BENCHMARK_MAIN();
