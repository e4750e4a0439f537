#include "routh/app/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "routh/expr.hpp"

namespace routh::app {

using nlohmann::json;

namespace {

std::string qname(std::size_t i) { return "q" + std::to_string(i + 1); }
std::string qdname(std::size_t i) { return "qd" + std::to_string(i + 1); }

struct Binder {
  std::map<std::string, double> parameters;
  expr::NameSet parameter_names;

  ScalarField field(const std::string& path, const json& src, const std::vector<std::string>& slots) const {
    if (!src.is_string()) throw InputError(path + ": expected an expression string");
    const expr::NameSet vars(slots.begin(), slots.end());
    try {
      const expr::Expr e = expr::parse(src.get<std::string>(), vars, parameter_names);
      return expr::bind(e, slots, parameters);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.message(), e.offset());
    }
  }
};

std::vector<double> numbers(const json& j, const std::string& path, std::size_t expected) {
  if (!j.is_array() || j.size() != expected)
    throw InputError(path + ": expected an array of " + std::to_string(expected) + " numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError(path + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Interval> intervals(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw InputError(path + ": expected " + std::to_string(n) + " intervals");
  std::vector<Interval> out;
  for (const auto& iv : j) {
    const auto lh = numbers(iv, path, 2);
    if (!(lh[0] < lh[1])) throw InputError(path + ": interval must have lo < hi");
    out.push_back({lh[0], lh[1]});
  }
  return out;
}

SampleBox read_box(const json& holder, std::size_t n) {
  SampleBox box = SampleBox::uniform(n);
  if (!holder.is_object() || !holder.contains("sample_box")) return box;
  const json& b = holder.at("sample_box");
  if (b.contains("q")) box.q = intervals(b.at("q"), "sample_box.q", n);
  if (b.contains("qd")) box.qd = intervals(b.at("qd"), "sample_box.qd", n);
  return box;
}

std::size_t one_based_index(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_number_integer()) throw InputError(path + ": expected an integer index");
  const auto v = j.get<long long>();
  if (v < 1 || static_cast<std::size_t>(v) > n) throw InputError(path + ": index out of range 1.." + std::to_string(n));
  return static_cast<std::size_t>(v - 1);
}

Scenario load(const json& doc) {
  Scenario sc;
  sc.source = doc;
  sc.name = doc.value("name", std::string("scenario"));

  if (!doc.contains("system") || !doc.at("system").is_object()) throw InputError("missing 'system' object");
  const json& sysj = doc.at("system");
  if (!sysj.contains("n") || !sysj.at("n").is_number_integer() || sysj.at("n").get<long long>() < 1)
    throw InputError("system.n must be a positive integer");
  const auto n = static_cast<std::size_t>(sysj.at("n").get<long long>());

  std::vector<std::string> positions;
  std::vector<std::string> state_slots;
  for (std::size_t i = 0; i < n; ++i) positions.push_back(qname(i));
  state_slots = positions;
  for (std::size_t i = 0; i < n; ++i) state_slots.push_back(qdname(i));

  Binder binder;
  if (sysj.contains("parameters")) {
    for (const auto& [key, value] : sysj.at("parameters").items()) {
      if (!value.is_number()) throw InputError("system.parameters." + key + ": expected a number");
      const bool clash = key == "s" || std::find(state_slots.begin(), state_slots.end(), key) != state_slots.end();
      if (clash) throw InputError("system.parameters." + key + ": name collides with a variable");
      binder.parameters[key] = value.get<double>();
      binder.parameter_names.insert(key);
    }
  }
  if (!sysj.contains("lagrangian")) throw InputError("system.lagrangian is required");
  sc.system.emplace(n, binder.field("system.lagrangian", sysj.at("lagrangian"), state_slots), binder.parameters);

  if (doc.contains("symmetry")) {
    const json& symj = doc.at("symmetry");
    if (!symj.contains("indices") || !symj.at("indices").is_array())
      throw InputError("symmetry.indices must be an array");
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < symj.at("indices").size(); ++i)
      group.push_back(one_based_index(symj.at("indices")[i], "symmetry.indices[" + std::to_string(i) + "]", n));
    const std::size_t m = group.size();
    const std::size_t r = n >= m ? n - m : 0;

    std::vector<ScalarField> f;
    if (symj.contains("f")) {
      const json& fj = symj.at("f");
      if (!fj.is_array() || fj.size() != m) throw InputError("symmetry.f must have one expression per direction");
      for (std::size_t a = 0; a < m; ++a) f.push_back(binder.field("symmetry.f[" + std::to_string(a) + "]", fj[a], positions));
    } else {
      f.assign(m, ScalarField::constant(n, 0.0));
    }

    std::vector<std::vector<ScalarField>> gamma(m, std::vector<ScalarField>(r, ScalarField::constant(n, 0.0)));
    if (symj.contains("gamma")) {
      const json& gj = symj.at("gamma");
      if (!gj.is_array() || gj.size() != m) throw InputError("symmetry.gamma must have one row per direction");
      for (std::size_t a = 0; a < m; ++a) {
        if (!gj[a].is_array() || gj[a].size() != r)
          throw InputError("symmetry.gamma[" + std::to_string(a) + "] must have n - m entries");
        for (std::size_t k = 0; k < r; ++k)
          gamma[a][k] = binder.field("symmetry.gamma[" + std::to_string(a) + "][" + std::to_string(k) + "]", gj[a][k],
                                     positions);
      }
    }

    std::optional<std::vector<ScalarField>> finite;
    if (symj.contains("F")) {
      const json& fj = symj.at("F");
      if (!fj.is_array() || fj.size() != m) throw InputError("symmetry.F must have one expression per direction");
      auto slots = positions;
      slots.push_back("s");
      finite.emplace();
      for (std::size_t a = 0; a < m; ++a)
        finite->push_back(binder.field("symmetry.F[" + std::to_string(a) + "]", fj[a], slots));
    }
    sc.box = read_box(symj, n);
    sc.symmetry.emplace(n, std::move(group), std::move(f), std::move(gamma), std::move(finite), sc.box);
  }

  if (doc.contains("functional")) {
    if (sc.symmetry) throw InputError("give either 'symmetry' or 'functional', not both");
    const json& fj = doc.at("functional");
    FunctionalSpec fs;
    fs.phi_index = one_based_index(fj.at("phi_index"), "functional.phi_index", n);
    fs.lambda = binder.field("functional.lambda", fj.at("lambda"), positions);
    fs.v_fct = binder.field("functional.V_fct", fj.at("V_fct"), positions);
    const json& mj = fj.at("mass");
    if (!mj.is_array() || mj.size() != n) throw InputError("functional.mass must be n x n");
    fs.mass.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!mj[i].is_array() || mj[i].size() != n) throw InputError("functional.mass must be n x n");
      for (std::size_t j = 0; j < n; ++j)
        fs.mass[i].push_back(
            binder.field("functional.mass[" + std::to_string(i) + "][" + std::to_string(j) + "]", mj[i][j], positions));
    }
    validate(fs, n);
    sc.box = read_box(fj, n);
    sc.functional = std::move(fs);
  }
  if (!sc.symmetry && !sc.functional) throw InputError("scenario needs a 'symmetry' or 'functional' block");

  const std::size_t m = sc.symmetry ? sc.symmetry->m() : 1;
  sc.mu.mu = doc.contains("mu") ? to_vector(numbers(doc.at("mu"), "mu", m)) : Vector::Zero(static_cast<Eigen::Index>(m));

  sc.initial.q = Vector::Zero(static_cast<Eigen::Index>(n));
  sc.initial.qd = Vector::Zero(static_cast<Eigen::Index>(n));
  if (doc.contains("initial")) {
    const json& ij = doc.at("initial");
    if (ij.contains("q")) sc.initial.q = to_vector(numbers(ij.at("q"), "initial.q", n));
    if (ij.contains("qd")) sc.initial.qd = to_vector(numbers(ij.at("qd"), "initial.qd", n));
  }
  if (doc.contains("integrator")) {
    const json& ij = doc.at("integrator");
    sc.dt = ij.value("dt", sc.dt);
    sc.horizon = ij.value("T", sc.horizon);
  }
  if (!(sc.dt > 0.0) || !(sc.horizon > 0.0)) throw InputError("integrator.dt and integrator.T must be positive");
  if (doc.contains("checks")) {
    const json& cj = doc.at("checks");
    sc.checks.samples = cj.value("samples", sc.checks.samples);
    sc.checks.tolerance = cj.value("tolerance", sc.checks.tolerance);
  }
  if (sc.checks.samples == 0 || !(sc.checks.tolerance >= 0.0)) throw InputError("checks need samples > 0, tolerance >= 0");
  if (doc.contains("outputs")) {
    const json& oj = doc.at("outputs");
    sc.outputs.full_trajectory = oj.value("full_trajectory", sc.outputs.full_trajectory);
    sc.outputs.reduced_trajectory = oj.value("reduced_trajectory", sc.outputs.reduced_trajectory);
    sc.outputs.lifted_trajectory = oj.value("lifted_trajectory", sc.outputs.lifted_trajectory);
    sc.outputs.report = oj.value("report", sc.outputs.report);
  }
  return sc;
}

}  // namespace

SymmetrySpec Scenario::monitor_symmetry() const {
  if (functional) return functional_symmetry(*functional, system->n(), box);
  return *symmetry;
}

json resolve(const json& doc) {
  if (!doc.is_object()) throw InputError("scenario must be a JSON object");
  if (!doc.contains("system") || !doc.at("system").is_string()) return doc;
  const std::string name = doc.at("system").get<std::string>();
  auto base = builtin_scenario(name);
  if (!base) throw InputError("unknown builtin system '" + name + "'");
  json patch = doc;
  patch.erase("system");
  base->merge_patch(patch);
  return *base;
}

Scenario load_scenario(const json& doc) {
  try {
    return load(resolve(doc));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario_file(const std::string& path_or_builtin) {
  namespace fs = std::filesystem;
  if (!fs::exists(path_or_builtin)) {
    if (auto doc = builtin_scenario(path_or_builtin)) return load_scenario(*doc);
    throw InputError("scenario file not found: " + path_or_builtin);
  }
  std::ifstream in(path_or_builtin);
  if (!in) throw InputError("cannot read " + path_or_builtin);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path_or_builtin + ": " + e.what());
  }
  return load_scenario(doc);
}

}  // namespace routh::app
