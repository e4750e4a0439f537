#include <CLI11.hpp>
#include <ostream>

#include "routh/app/commands.hpp"

namespace routh::app {

namespace {

struct Overrides {
  std::optional<double> dt;
  std::optional<double> horizon;
  std::vector<double> mu;
};

void apply(Scenario& sc, const Overrides& o) {
  if (o.dt) {
    if (!(*o.dt > 0.0)) throw InputError("--dt must be positive");
    sc.dt = *o.dt;
  }
  if (o.horizon) {
    if (!(*o.horizon > 0.0)) throw InputError("--T must be positive");
    sc.horizon = *o.horizon;
  }
  if (!o.mu.empty()) {
    if (o.mu.size() != static_cast<std::size_t>(sc.mu.mu.size()))
      throw InputError("--mu needs " + std::to_string(sc.mu.mu.size()) + " components");
    sc.mu.mu = Eigen::Map<const Vector>(o.mu.data(), static_cast<Eigen::Index>(o.mu.size()));
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Routh reduction for Lagrangians with translational symmetry", "routh"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string target = "full";
  CommandOptions opts;
  Overrides over;
  std::string demo_name;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario file or builtin name")->required();
    sub->add_option("--out-dir", opts.out_dir, "directory for CSV and report outputs");
    sub->add_option("--dt", over.dt, "integrator step");
    sub->add_option("--T", over.horizon, "integration horizon");
    sub->add_option("--mu", over.mu, "momentum value, comma separated")->delimiter(',');
  };
  CLI::App* verify = app.add_subcommand("verify", "run the applicability checks");
  CLI::App* reduce_cmd = app.add_subcommand("reduce", "classify, reduce and probe the Routhian");
  CLI::App* simulate = app.add_subcommand("simulate", "integrate the full or reduced dynamics");
  CLI::App* compare = app.add_subcommand("compare", "compare full and reduced flows");
  CLI::App* demo = app.add_subcommand("demo", "print a builtin scenario");
  for (CLI::App* sub : {verify, reduce_cmd, simulate, compare}) add_common(sub);
  simulate->add_option("--target", target, "full or reduced")->check(CLI::IsMember({"full", "reduced"}));
  demo->add_option("name", demo_name, "builtin name")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "routh: " << e.what() << '\n';
    return kInputError;
  }

  if (demo->parsed()) return cmd_demo(demo_name, out, err);

  try {
    Scenario sc = load_scenario_file(scenario_path);
    apply(sc, over);
    RunReport r;
    if (verify->parsed()) r = cmd_verify(sc, opts, out);
    if (reduce_cmd->parsed()) r = cmd_reduce(sc, opts, out);
    if (simulate->parsed()) r = cmd_simulate(sc, target == "full" ? Target::Full : Target::Reduced, opts, out);
    if (compare->parsed()) r = cmd_compare(sc, opts, out);
    return r.exit_status;
  } catch (const ParseError& e) {
    err << "routh: parse error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    err << "routh: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const UnsupportedCaseError& e) {
    err << "routh: unsupported case: " << e.what() << '\n';
    return kUnsupported;
  } catch (const Error& e) {
    err << "routh: " << e.what() << '\n';
    return kCheckFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "routh: " << e.what() << '\n';
    return kInputError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace routh::app
