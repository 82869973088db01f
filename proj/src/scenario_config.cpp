#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wmbridge/errors.hpp"
#include "wmbridge/io.hpp"
#include "wmbridge/scenario.hpp"

namespace wmb {

using nlohmann::json;

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"classical_quantum_bridge", "dispersion_free_newton", "operator_roundtrip",
                                              "uncertainty_survey",       "bohm_double_slit",       "pauli_precession",
                                              "observer_coupling",        "mixture_trace"};
  return names;
}

std::string scenario_name(ScenarioKind kind) { return scenario_names()[static_cast<std::size_t>(kind)]; }

bool ComparisonReport::pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

namespace {

ReportEntry entry(const std::string& name, double a, double b, double tol, const std::string& rel, bool ok) {
  ReportEntry e;
  e.name = name;
  e.value_a = a;
  e.value_b = b;
  e.abs_diff = std::abs(a - b);
  e.tolerance = tol;
  e.relation = rel;
  // NaN never passes
  e.pass = ok && std::isfinite(a) && std::isfinite(b);
  return e;
}

}  // namespace

void ComparisonReport::within(const std::string& name, double a, double b, double tolerance) {
  entries.push_back(entry(name, a, b, tolerance, "within", std::abs(a - b) <= tolerance));
}

void ComparisonReport::at_most(const std::string& name, double a, double bound) {
  entries.push_back(entry(name, a, bound, 0.0, "at_most", a <= bound));
}

void ComparisonReport::at_least(const std::string& name, double a, double bound) {
  entries.push_back(entry(name, a, bound, 0.0, "at_least", a >= bound));
}

void ComparisonReport::below(const std::string& name, double a, double bound) {
  entries.push_back(entry(name, a, bound, 0.0, "below", a < bound));
}

json ComparisonReport::to_json() const {
  json list = json::array();
  for (const auto& e : entries)
    list.push_back({{"name", e.name},
                    {"value_a", e.value_a},
                    {"value_b", e.value_b},
                    {"abs_diff", e.abs_diff},
                    {"tolerance", e.tolerance},
                    {"relation", e.relation},
                    {"pass", e.pass}});
  return {{"entries", list}, {"pass", pass()}};
}

ComparisonReport ComparisonReport::from_json(const json& j) {
  ComparisonReport r;
  for (const auto& e : j.at("entries")) {
    ReportEntry x;
    x.name = e.at("name").get<std::string>();
    x.value_a = e.at("value_a").get<double>();
    x.value_b = e.at("value_b").get<double>();
    x.abs_diff = e.at("abs_diff").get<double>();
    x.tolerance = e.at("tolerance").get<double>();
    x.relation = e.value("relation", "within");
    x.pass = e.at("pass").get<bool>();
    r.entries.push_back(x);
  }
  return r;
}

std::string ComparisonReport::summary() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << (e.pass ? "PASS " : "FAIL ") << e.name << ": " << format_number(e.value_a);
    if (e.relation == "within")
      out << " vs " << format_number(e.value_b) << " (diff " << format_number(e.abs_diff) << ", tol "
          << format_number(e.tolerance) << ")";
    else
      out << " " << e.relation << " " << format_number(e.value_b);
    out << '\n';
  }
  out << (pass() ? "overall: PASS" : "overall: FAIL") << '\n';
  return out.str();
}

namespace {

json physics_defaults() {
  return {{"hbar", 1.0}, {"mass", 1.0}, {"charge", 1.0}, {"g_factor", 2.0}, {"light_speed", 1.0}};
}

json potential(const std::string& kind, double omega = 0.0) {
  return {{"kind", kind},           {"omega", omega},          {"force", 0.0},        {"lambda", 0.0},
          {"barrier_height", 0.0}, {"barrier_center", 0.0}, {"barrier_width", 1.0}};
}

json grid(std::uint64_t points, double length) { return {{"points", points}, {"length", length}}; }

json time(double t_final, double dt, std::uint64_t snapshots) {
  return {{"t_final", t_final}, {"dt", dt}, {"snapshots", snapshots}};
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

std::string type_name(const json& j) {
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

void check_value(const json& user, const json& schema, const std::string& ptr) {
  if (schema.is_object()) {
    if (!user.is_object()) throw SchemaError(ptr.empty() ? "/" : ptr, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string child = ptr + "/" + escape_pointer(it.key());
      if (!schema.contains(it.key())) throw SchemaError(child, "unknown key");
      check_value(it.value(), schema.at(it.key()), child);
    }
    return;
  }
  if (schema.is_number_integer()) {
    if (!user.is_number_integer() || (user.is_number_integer() && !user.is_number_unsigned() && user.get<long long>() < 0))
      throw SchemaError(ptr, "expected a non-negative integer, found " + type_name(user));
    return;
  }
  if (schema.is_number()) {
    if (!user.is_number()) throw SchemaError(ptr, "expected a number, found " + type_name(user));
    return;
  }
  if (schema.is_string()) {
    if (!user.is_string()) throw SchemaError(ptr, "expected a string, found " + type_name(user));
    return;
  }
  if (schema.is_boolean()) {
    if (!user.is_boolean()) throw SchemaError(ptr, "expected a boolean, found " + type_name(user));
    return;
  }
  if (schema.is_array()) {
    if (!user.is_array()) throw SchemaError(ptr, "expected an array, found " + type_name(user));
    if (schema.empty()) return;
    for (std::size_t i = 0; i < user.size(); ++i) check_value(user[i], schema[0], ptr + "/" + std::to_string(i));
    return;
  }
}

}  // namespace

json scenario_defaults(ScenarioKind kind) {
  json d;
  d["scenario"] = scenario_name(kind);
  d["physics"] = physics_defaults();
  d["output"] = "runs/" + scenario_name(kind);
  d["rng_seed"] = std::uint64_t{20240917};
  switch (kind) {
    case ScenarioKind::classical_quantum_bridge:
      d["grid"] = grid(256, 40.0);
      d["potential"] = potential("harmonic", 1.0);
      d["time"] = time(1.0, 0.01, 5);
      d["setup"] = {{"x0", 1.0}, {"p0", 0.5}, {"sigma_x", 1.0}, {"sigma_p", 0.8}, {"expect", "auto"}};
      d["tolerances"] = {{"bridge_l2", 1e-4}, {"boundary_l2", 1e-2}, {"trace", 1e-8}};
      break;
    case ScenarioKind::dispersion_free_newton:
      d["grid"] = grid(256, 20.0);
      d["potential"] = potential("harmonic", 1.0);
      d["time"] = time(2.0 * M_PI, 0.01, 41);
      d["setup"] = {{"x0", 2.0}, {"p0", 0.0}, {"width_cells", 4.0}};
      d["tolerances"] = {{"centroid_fraction", 1e-2}};
      break;
    case ScenarioKind::operator_roundtrip:
      d["grid"] = grid(128, 40.0);
      d["setup"] = {{"observable", "p^2*x^2"}};
      d["tolerances"] = {{"density_amplitude", 1e-6}, {"density_phase_space", 1e-4}};
      break;
    case ScenarioKind::uncertainty_survey:
      d["grid"] = grid(256, 30.0);
      d["time"] = time(2.0, 0.01, 11);
      d["setup"] = {{"sigma_x", 0.8},
                    {"p0", 0.5},
                    {"classical_points", std::uint64_t{512}},
                    {"classical_length", 40.0},
                    {"classical_sigma_x", 0.25},
                    {"classical_sigma_p", 0.4}};
      d["tolerances"] = {{"bound", 1e-6}, {"classical", 1e-6}};
      break;
    case ScenarioKind::bohm_double_slit:
      d["grid"] = grid(1024, 80.0);
      d["time"] = time(5.0, 0.005, 11);
      d["setup"] = {{"separation", 8.0},
                    {"width", 0.5},
                    {"momentum", 0.0},
                    {"seeds", std::uint64_t{10000}},
                    {"bins", std::uint64_t{50}}};
      d["tolerances"] = {{"chi2_per_dof", 1.5}, {"fringe_relative", 0.1}};
      break;
    case ScenarioKind::pauli_precession:
      d["grid"] = grid(64, 16.0);
      d["potential"] = potential("harmonic", 1.0);
      d["time"] = time(2.0 * M_PI, 0.01, 41);
      d["setup"] = {{"field", {0.0, 0.0, 1.0}}, {"spinor", {1.0, 0.0, 1.0, 0.0}}};
      d["tolerances"] = {{"larmor_relative", 1e-4}, {"commutator", 1e-12}, {"reduction", 1e-10}, {"trace", 1e-8}};
      break;
    case ScenarioKind::observer_coupling:
      d["grid"] = grid(64, 40.0);
      d["potential"] = potential("free");
      d["time"] = time(1.0, 0.02, 11);
      d["setup"] = {{"strength", 1.0},
                    {"mass2", 1.0},
                    {"probe_dx", 3.0},
                    {"species1", {{"x0", 0.0}, {"p0", 0.5}, {"sigma_x", 2.0}, {"sigma_p", 0.4}}},
                    {"species2", {{"x0", 0.0}, {"p0", -0.5}, {"sigma_x", 2.0}, {"sigma_p", 1.5}}}};
      d["tolerances"] = {{"number", 1e-10}, {"momentum", 1e-6}, {"energy", 1e-5}};
      break;
    case ScenarioKind::mixture_trace:
      d["grid"] = grid(128, 20.0);
      d["potential"] = potential("harmonic", 1.0);
      d["setup"] = {{"basis_size", std::uint64_t{8}},
                    {"levels", {std::uint64_t{0}, std::uint64_t{1}}},
                    {"weights", {0.5, 0.5}},
                    {"observables", {"x", "p", "x^2", "p^2", "x*p", "x^4"}}};
      d["tolerances"] = {{"trace", 1e-6}, {"purity", 1e-3}, {"factorization", 0.999}};
      break;
  }
  return d;
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw SchemaError("/", "config must be a JSON object");
  if (!doc.contains("scenario")) throw SchemaError("/scenario", "missing required key");
  if (!doc.at("scenario").is_string()) throw SchemaError("/scenario", "expected a string");
  const auto& names = scenario_names();
  const auto name = doc.at("scenario").get<std::string>();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw SchemaError("/scenario", "unknown scenario '" + name + "'");
  ScenarioConfig c;
  c.scenario = static_cast<ScenarioKind>(it - names.begin());
  const auto defaults = scenario_defaults(c.scenario);
  check_value(doc, defaults, "");
  c.input = doc;
  c.resolved = defaults;
  c.resolved.merge_patch(doc);

  if (c.resolved.contains("potential")) {
    static const std::vector<std::string> kinds{"free", "harmonic", "linear", "quartic", "double_gaussian_barrier"};
    const auto k = c.resolved["potential"]["kind"].get<std::string>();
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end())
      throw SchemaError("/potential/kind", "unknown potential '" + k + "'");
  }
  if (c.resolved.contains("time")) {
    const auto& t = c.resolved["time"];
    if (!(t["dt"].get<double>() > 0.0)) throw SchemaError("/time/dt", "must be positive");
    if (t["snapshots"].get<std::uint64_t>() < 2) throw SchemaError("/time/snapshots", "need at least 2");
  }
  if (c.resolved.contains("setup") && c.resolved["setup"].contains("weights") &&
      c.resolved["setup"]["weights"].size() != c.resolved["setup"]["levels"].size())
    throw SchemaError("/setup/weights", "weights and levels differ in length");
  if (c.resolved.contains("setup") && c.resolved["setup"].contains("field") && c.resolved["setup"]["field"].size() != 3)
    throw SchemaError("/setup/field", "expected three components");
  if (c.resolved.contains("setup") && c.resolved["setup"].contains("spinor") &&
      c.resolved["setup"]["spinor"].size() != 4)
    throw SchemaError("/setup/spinor", "expected [re_up, im_up, re_down, im_down]");
  if (c.scenario == ScenarioKind::classical_quantum_bridge) {
    const auto e = c.resolved["setup"]["expect"].get<std::string>();
    if (e != "auto" && e != "agree" && e != "disagree")
      throw SchemaError("/setup/expect", "expected auto, agree or disagree");
  }

  const auto& ph = c.resolved["physics"];
  c.physics.hbar = ph["hbar"].get<double>();
  c.physics.mass = ph["mass"].get<double>();
  c.physics.charge = ph["charge"].get<double>();
  c.physics.g_factor = ph["g_factor"].get<double>();
  c.physics.light_speed = ph["light_speed"].get<double>();
  c.output = c.resolved["output"].get<std::string>();
  c.rng_seed = c.resolved["rng_seed"].get<std::uint64_t>();
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace wmb
