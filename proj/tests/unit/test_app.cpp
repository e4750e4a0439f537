#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "builtin.hpp"
#include "routh/app/commands.hpp"
#include "routh/app/report.hpp"
#include "routh/errors.hpp"

using namespace routh;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "routh");
  std::ostringstream out, err;
  const int code = app::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("routh_app_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_doc(const fs::path& dir, const json& doc, const std::string& file = "scenario.json") {
  const fs::path p = dir / file;
  std::ofstream(p) << doc.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json report(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

const json* find_check(const json& rep, const std::string& name) {
  for (const auto& c : rep.at("checks"))
    if (c.at("name") == name) return &c;
  return nullptr;
}

json charged_3d() {
  return {{"name", "charged_3d"},
          {"system",
           {{"n", 3}, {"lagrangian", "0.5*(qd1^2+qd2^2+qd3^2)+(qd1*q2-qd2*q1)"}}},
          {"symmetry", {{"indices", {1, 2}}, {"f", {"-q2", "q1"}}}},
          {"mu", {1, 0}},
          {"initial", {{"q", {0, 0, 0}}, {"qd", {1, 0, 0}}}}};
}

}  // namespace

TEST(Scenario, EveryBuiltinLoads) {
  const auto names = app::builtin_names();
  EXPECT_EQ(names.size(), std::size(fixture::kBuiltins));
  for (const char* name : fixture::kBuiltins) {
    const auto sc = fixture::builtin(name);
    EXPECT_EQ(sc.name, name);
    EXPECT_EQ(sc.dt, 1e-3);
    EXPECT_EQ(sc.horizon, 10.0);
  }
  EXPECT_FALSE(app::builtin_scenario("nope").has_value());
}

TEST(Scenario, ResolveMergesOverBuiltin) {
  const auto sc = app::load_scenario({{"system", "charged_particle"}, {"mu", {0, 1}}, {"name", "shifted"}});
  EXPECT_EQ(sc.name, "shifted");
  EXPECT_EQ(sc.mu.mu, (Vector{{0.0, 1.0}}));
  ASSERT_TRUE(sc.symmetry.has_value());
  EXPECT_EQ(sc.symmetry->m(), 2u);
}

TEST(Scenario, FunctionalModeDefaults) {
  const auto sc = fixture::builtin("functional_toy");
  EXPECT_TRUE(sc.functional_mode());
  EXPECT_FALSE(sc.symmetry.has_value());
  EXPECT_EQ(sc.monitor_symmetry().group_indices(), (std::vector<std::size_t>{1}));
}

TEST(Scenario, ParseErrorCarriesFieldAndOffset) {
  auto doc = *app::builtin_scenario("free_cyclic");
  doc["system"]["lagrangian"] = "0.5*(qd1^2+qd3^2)";
  try {
    app::load_scenario(doc);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 11u);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("system.lagrangian"), std::string::npos) << msg;
    EXPECT_NE(msg.find("qd3"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("offset"), msg.rfind("offset")) << msg;
  }
}

TEST(Scenario, MalformedDocumentsAreInputErrors) {
  const auto base = *app::builtin_scenario("charged_particle");
  auto bad = [&](const std::function<void(json&)>& edit) {
    json doc = base;
    edit(doc);
    EXPECT_THROW(app::load_scenario(doc), InputError) << doc.dump();
  };
  bad([](json& d) { d.erase("system"); });
  bad([](json& d) { d["system"]["n"] = 0; });
  bad([](json& d) { d["system"]["lagrangian"] = 3; });
  bad([](json& d) { d["system"]["parameters"]["q1"] = 1; });
  bad([](json& d) { d["symmetry"]["indices"] = {1, 3}; });
  bad([](json& d) { d["mu"] = {1}; });
  bad([](json& d) { d["initial"]["q"] = {0, 0, 0}; });
  bad([](json& d) { d["symmetry"]["sample_box"] = {{"q", {{1, 0}, {0, 1}}}}; });
  EXPECT_THROW(app::load_scenario({{"system", "no_such_builtin"}}), InputError);
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, app::kPass);
  EXPECT_EQ(cli({}).code, app::kInputError);
  EXPECT_EQ(cli({"verify"}).code, app::kInputError);
  EXPECT_EQ(cli({"simulate", "--scenario", "free_cyclic", "--target", "sideways"}).code, app::kInputError);
  EXPECT_EQ(cli({"frobnicate"}).code, app::kInputError);
}

TEST(Cli, DemoPrintsLoadableDocument) {
  for (const char* name : fixture::kBuiltins) {
    const Result r = cli({"demo", name});
    ASSERT_EQ(r.code, app::kPass);
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc, *app::builtin_scenario(name));
    EXPECT_NO_THROW(app::load_scenario(doc));
  }
  EXPECT_EQ(cli({"demo", "nope"}).code, app::kInputError);
}

TEST(Cli, VerifyBuiltinsPassWithExpectedCase) {
  const std::map<std::string, std::string> expected{{"charged_particle", "C"},
                                                    {"free_cyclic", "A"},
                                                    {"quasi_cyclic_totalderiv", "B"},
                                                    {"curved_gamma", "A"},
                                                    {"functional_toy", "D"}};
  for (const auto& [name, tag] : expected) {
    const fs::path dir = scratch("verify_" + name);
    const Result r = cli({"verify", "--scenario", name, "--out-dir", dir.string()});
    EXPECT_EQ(r.code, app::kPass) << name << "\n" << r.out << r.err;
    const json rep = report(dir);
    EXPECT_EQ(rep.at("reduction").at("case"), tag) << name;
    EXPECT_EQ(rep.at("command"), "verify");
    EXPECT_EQ(rep.at("exit_status"), 0);
    for (const auto& c : rep.at("checks")) EXPECT_TRUE(c.at("passed").get<bool>()) << name << " " << c.dump();
  }
}

TEST(Cli, ChargedCocycleInReport) {
  const fs::path dir = scratch("cocycle");
  ASSERT_EQ(cli({"verify", "--scenario", "charged_particle", "--out-dir", dir.string()}).code, 0);
  const json sigma = report(dir).at("reduction").at("cocycle");
  EXPECT_NEAR(sigma[0][1].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(sigma[1][0].get<double>(), -2.0, 1e-12);
  EXPECT_NEAR(sigma[0][0].get<double>(), 0.0, 1e-12);
}

TEST(Cli, WrongShiftFailsQuasiInvariance) {
  const fs::path dir = scratch("wrong_f");
  json doc = {{"system", "charged_particle"}, {"symmetry", {{"f", {"-e*B*q2", "0"}}, {"F", nullptr}}}};
  const std::string file = write_doc(dir, doc);
  EXPECT_EQ(cli({"verify", "--scenario", file, "--out-dir", dir.string()}).code, app::kCheckFailure);
  const json rep = report(dir);
  const json* qi = find_check(rep, "quasi_invariance");
  ASSERT_NE(qi, nullptr);
  EXPECT_FALSE(qi->at("passed").get<bool>());
  EXPECT_EQ(qi->at("worst_point").size(), 4u);
  EXPECT_EQ(cli({"reduce", "--scenario", file, "--out-dir", dir.string()}).code, app::kCheckFailure);
  EXPECT_EQ(cli({"compare", "--scenario", file, "--out-dir", dir.string()}).code, app::kCheckFailure);
}

TEST(Cli, LinearInGroupVelocityFailsRegularity) {
  const fs::path dir = scratch("linear");
  const json doc = {{"system", {{"n", 2}, {"lagrangian", "qd1 + 0.5*qd2^2"}}},
                    {"symmetry", {{"indices", {1}}}},
                    {"mu", {1}}};
  const std::string file = write_doc(dir, doc);
  EXPECT_EQ(cli({"verify", "--scenario", file, "--out-dir", dir.string()}).code, app::kCheckFailure);
  const json rep = report(dir);
  const json* g = find_check(rep, "G_regularity");
  ASSERT_NE(g, nullptr);
  EXPECT_FALSE(g->at("passed").get<bool>());
  EXPECT_EQ(cli({"simulate", "--target", "reduced", "--scenario", file, "--out-dir", dir.string()}).code,
            app::kCheckFailure);
}

TEST(Cli, NondegenerateCocycleWithShapeIsUnsupported) {
  const fs::path dir = scratch("charged3d");
  const std::string file = write_doc(dir, charged_3d());
  const Result v = cli({"verify", "--scenario", file, "--out-dir", dir.string()});
  EXPECT_EQ(v.code, app::kPass) << v.out;
  EXPECT_EQ(report(dir).at("reduction").at("case"), "unsupported");
  const Result r = cli({"reduce", "--scenario", file, "--out-dir", dir.string()});
  EXPECT_EQ(r.code, app::kUnsupported) << r.out << r.err;
  const json rep = report(dir);
  EXPECT_NE(rep.at("reduction").at("message").get<std::string>().find("rank 2"), std::string::npos);
  EXPECT_EQ(cli({"compare", "--scenario", file, "--out-dir", dir.string()}).code, app::kUnsupported);
}

TEST(Cli, FunctionalModeWithNonzeroMomentumIsUnsupported) {
  const fs::path dir = scratch("functional_mu");
  EXPECT_EQ(cli({"reduce", "--scenario", "functional_toy", "--mu", "0.5", "--out-dir", dir.string()}).code,
            app::kUnsupported);
}

TEST(Cli, InputErrorsExitTwo) {
  const fs::path dir = scratch("input");
  EXPECT_EQ(cli({"verify", "--scenario", (dir / "missing.json").string()}).code, app::kInputError);
  std::ofstream(dir / "broken.json") << "{\"system\": ";
  EXPECT_EQ(cli({"verify", "--scenario", (dir / "broken.json").string()}).code, app::kInputError);

  json doc = *app::builtin_scenario("free_cyclic");
  doc["system"]["lagrangian"] = "0.5*(qd1^2 + )";
  const Result r = cli({"verify", "--scenario", write_doc(dir, doc), "--out-dir", dir.string()});
  EXPECT_EQ(r.code, app::kInputError);
  EXPECT_NE(r.err.find("system.lagrangian"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("offset 13"), std::string::npos) << r.err;

  EXPECT_EQ(cli({"verify", "--scenario", "charged_particle", "--mu", "1,2,3"}).code, app::kInputError);
  EXPECT_EQ(cli({"simulate", "--scenario", "free_cyclic", "--dt", "-1"}).code, app::kInputError);
  EXPECT_EQ(cli({"simulate", "--scenario", "free_cyclic", "--T", "0"}).code, app::kInputError);
  EXPECT_EQ(cli({"simulate", "--scenario", "free_cyclic", "--dt", "abc"}).code, app::kInputError);
}

TEST(Cli, MomentumOverrideReachesProbe) {
  const fs::path dir = scratch("mu_override");
  ASSERT_EQ(cli({"reduce", "--scenario", "charged_particle", "--mu", "0,1", "--out-dir", dir.string()}).code, 0);
  // -1/2 ((mu1 - 2y)^2 + (mu2 + 2x)^2) at the origin
  EXPECT_NEAR(report(dir).at("probe").at("routhian").get<double>(), -0.5, 1e-14);
}

TEST(Cli, ReduceProbeValues) {
  struct Expect {
    const char* name;
    double routhian;
  };
  for (const Expect& e : {Expect{"charged_particle", -0.5}, Expect{"free_cyclic", 1.5},
                          Expect{"quasi_cyclic_totalderiv", 0.07}, Expect{"curved_gamma", -0.58},
                          Expect{"functional_toy", -0.125}}) {
    const fs::path dir = scratch(std::string("probe_") + e.name);
    ASSERT_EQ(cli({"reduce", "--scenario", e.name, "--out-dir", dir.string()}).code, 0) << e.name;
    const json probe = report(dir).at("probe");
    EXPECT_NEAR(probe.at("routhian").get<double>(), e.routhian, 1e-12) << e.name;
    if (probe.contains("routhian_closed_form"))
      EXPECT_NEAR(probe.at("routhian_closed_form").get<double>(), e.routhian, 1e-12) << e.name;
  }
  const fs::path dir = scratch("probe_charged_detail");
  ASSERT_EQ(cli({"reduce", "--scenario", "charged_particle", "--out-dir", dir.string()}).code, 0);
  const json probe = report(dir).at("probe");
  EXPECT_NEAR(probe.at("gradient_x")[0].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(probe.at("gradient_x")[1].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(probe.at("gyroscopic_form")[0][1].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(probe.at("gyroscopic_form")[1][0].get<double>(), -2.0, 1e-12);
}

TEST(Cli, CsvLayoutAndMonitors) {
  const fs::path dir = scratch("csv");
  ASSERT_EQ(cli({"simulate", "--scenario", "free_cyclic", "--T", "0.5", "--dt", "0.01", "--out-dir", dir.string()})
                .code,
            0);
  const std::string raw = slurp(dir / "full.csv");
  EXPECT_EQ(raw.find('\r'), std::string::npos);
  EXPECT_EQ(raw.back(), '\n');
  const auto rows = csv(dir / "full.csv");
  ASSERT_EQ(rows.size(), 52u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "q1", "q2", "qd1", "qd2", "J1", "E"}));
  EXPECT_EQ(rows.back()[0], "0.5");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 7u);
    const double qd1 = std::stod(rows[i][3]), qd2 = std::stod(rows[i][4]);
    EXPECT_NEAR(std::stod(rows[i][5]), qd1, 1e-12);
    EXPECT_NEAR(std::stod(rows[i][6]), 0.5 * (qd1 * qd1 + qd2 * qd2), 1e-12);
    EXPECT_NEAR(std::stod(rows[i][1]), std::stod(rows[i][0]), 1e-12);
  }
}

TEST(Cli, MagneticReducedCsvHasNoVelocities) {
  const fs::path dir = scratch("csv_magnetic");
  ASSERT_EQ(cli({"simulate", "--target", "reduced", "--scenario", "charged_particle", "--T", "0.1", "--out-dir",
                 dir.string()})
                .code,
            0);
  const auto rows = csv(dir / "reduced.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "q1", "q2", "J1", "J2", "E"}));
  EXPECT_FALSE(fs::exists(dir / "lifted.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(std::stod(rows[i][3]), 1.0, 1e-12);
    EXPECT_NEAR(std::stod(rows[i][4]), 0.0, 1e-12);
  }
}

TEST(Cli, OutputsAreDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const fs::path& d : {a, b})
    ASSERT_EQ(cli({"simulate", "--target", "reduced", "--scenario", "curved_gamma", "--T", "1", "--out-dir",
                   d.string()})
                  .code,
              0);
  for (const char* f : {"reduced.csv", "lifted.csv", "report.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Report, SortedKeysAndNullForNonFinite) {
  app::RunReport r;
  r.command = "verify";
  r.scenario = "x";
  ReportEntry e;
  e.name = "thing";
  e.residual = std::nan("");
  e.tolerance = 1e-8;
  e.passed = false;
  r.checks.add(e);
  r.sections["zeta"] = 1;
  r.sections["alpha"] = app::to_json(Vector{{1.0, std::numeric_limits<double>::infinity()}});
  const std::string s = app::serialize(r);
  EXPECT_EQ(s.back(), '\n');
  EXPECT_LT(s.find("\"alpha\""), s.find("\"checks\""));
  EXPECT_LT(s.find("\"command\""), s.find("\"exit_status\""));
  EXPECT_LT(s.find("\"scenario\""), s.find("\"zeta\""));
  const json j = json::parse(s);
  EXPECT_TRUE(j.at("checks")[0].at("residual").is_null());
  EXPECT_TRUE(j.at("alpha")[1].is_null());
}

TEST(Report, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 123456789.125}) EXPECT_EQ(std::stod(app::format_double(x)), x);
  EXPECT_EQ(app::format_double(0.5), "0.5");
  EXPECT_EQ(app::format_double(std::nan("")), "nan");
}

TEST(Cli, ChargedParticleReturnsAfterOnePeriod) {
  const fs::path dir = scratch("charged_period");
  ASSERT_EQ(cli({"simulate", "--scenario", "charged_particle", "--T", "3.141592653589793", "--out-dir", dir.string()})
                .code,
            0);
  const auto rows = csv(dir / "full.csv");
  const auto& last = rows.back();
  EXPECT_NEAR(std::stod(last[0]), std::numbers::pi, 1e-12);
  EXPECT_NEAR(std::stod(last[1]), 0.0, 1e-8);
  EXPECT_NEAR(std::stod(last[2]), 0.0, 1e-8);
  EXPECT_NEAR(std::stod(last[3]), 1.0, 1e-8);
  EXPECT_NEAR(std::stod(last[4]), 0.0, 1e-8);
}

TEST(Cli, FreeReducedAndLiftedAreStraightLines) {
  const fs::path dir = scratch("free_reduced");
  ASSERT_EQ(cli({"simulate", "--target", "reduced", "--scenario", "free_cyclic", "--out-dir", dir.string()}).code, 0);
  const auto reduced = csv(dir / "reduced.csv");
  EXPECT_EQ(reduced[0], (std::vector<std::string>{"t", "q2", "qd2", "J1", "E"}));
  for (std::size_t i = 1; i < reduced.size(); i += 97)
    EXPECT_NEAR(std::stod(reduced[i][1]), 2.0 * std::stod(reduced[i][0]), 1e-11);
  const auto lifted = csv(dir / "lifted.csv");
  ASSERT_EQ(lifted.size(), reduced.size());
  for (std::size_t i = 1; i < lifted.size(); i += 97) {
    EXPECT_NEAR(std::stod(lifted[i][1]), std::stod(lifted[i][0]), 1e-11);
    EXPECT_NEAR(std::stod(lifted[i][3]), 1.0, 1e-12);
  }
}

TEST(Cli, FunctionalToyReducedIsOscillator) {
  const fs::path dir = scratch("functional_reduced");
  ASSERT_EQ(cli({"simulate", "--target", "reduced", "--scenario", "functional_toy", "--out-dir", dir.string()}).code,
            0);
  const auto rows = csv(dir / "reduced.csv");
  EXPECT_EQ(rows[0][1], "q1");
  for (std::size_t i = 1; i < rows.size(); i += 53)
    EXPECT_NEAR(std::stod(rows[i][1]), 0.5 * std::cos(std::stod(rows[i][0])), 1e-9);
}

TEST(Cli, IntegrationFailureKeepsPartialTrajectory) {
  const fs::path dir = scratch("blowup");
  const json doc = {{"system", {{"n", 2}, {"lagrangian", "0.5*qd1^2+0.5*qd2^2-log(q1)"}}},
                    {"symmetry", {{"indices", {2}}, {"sample_box", {{"q", {{0.1, 1}, {-1, 1}}}}}}},
                    {"mu", {0}},
                    {"initial", {{"q", {0.5, 0}}, {"qd", {-1, 0}}}}};
  const std::string file = write_doc(dir, doc);
  const Result r = cli({"simulate", "--scenario", file, "--out-dir", dir.string()});
  EXPECT_EQ(r.code, app::kIntegrationFailure) << r.out << r.err;
  const auto rows = csv(dir / "full.csv");
  EXPECT_GT(rows.size(), 2u);
  EXPECT_LT(rows.size(), 10002u);
  const json sim = report(dir).at("simulation");
  EXPECT_FALSE(sim.at("completed").get<bool>());
  EXPECT_EQ(sim.at("failure_step").get<std::size_t>(), rows.size() - 1);
  EXPECT_EQ(cli({"verify", "--scenario", file, "--out-dir", dir.string()}).code, app::kPass);
}

TEST(Cli, StepOverrideSetsSampleCount) {
  const fs::path dir = scratch("step_override");
  ASSERT_EQ(cli({"simulate", "--scenario", "curved_gamma", "--dt", "0.03", "--T", "0.3", "--out-dir", dir.string()})
                .code,
            0);
  EXPECT_EQ(csv(dir / "full.csv").size(), 12u);
  const json sim = report(dir).at("simulation");
  EXPECT_EQ(sim.at("steps"), 10);
  EXPECT_NEAR(sim.at("dt").get<double>(), 0.03, 1e-15);
}

TEST(Compare, AllBuiltinsPass) {
  for (const char* name : fixture::kBuiltins) {
    std::ostringstream out;
    const auto rep = app::cmd_compare(fixture::builtin(name), {".", false}, out);
    EXPECT_EQ(rep.exit_status, app::kPass) << name << "\n" << out.str();
    EXPECT_TRUE(rep.checks.all_passed()) << name;
  }
}

TEST(Compare, ImpossibleToleranceFails) {
  std::ostringstream out;
  app::CompareTolerances tol;
  tol.projection = -1.0;
  auto sc = fixture::builtin("quasi_cyclic_totalderiv");
  sc.horizon = 0.1;
  EXPECT_EQ(app::cmd_compare(sc, {".", false}, out, tol).exit_status, app::kCheckFailure);
}
