#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wmbridge/errors.hpp"
#include "wmbridge/io.hpp"
#include "wmbridge/scenario.hpp"

using namespace wmb;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wmb_runner_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string pointer_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const SchemaError& e) {
    return e.pointer();
  }
  return "";
}

RunResult run(json doc) { return run_scenario(parse_config(doc)); }

}  // namespace

TEST_CASE("schema errors carry JSON pointers") {
  CHECK(pointer_of({{"scenario", "no_such_thing"}}) == "/scenario");
  CHECK(pointer_of(json::object()) == "/scenario");
  CHECK(pointer_of({{"scenario", "classical_quantum_bridge"}, {"grid", {{"pointz", 64}}}}) == "/grid/pointz");
  CHECK(pointer_of({{"scenario", "classical_quantum_bridge"}, {"grid", {{"points", 64.5}}}}) == "/grid/points");
  CHECK(pointer_of({{"scenario", "classical_quantum_bridge"}, {"grid", {{"points", -4}}}}) == "/grid/points");
  CHECK(pointer_of({{"scenario", "mixture_trace"}, {"setup", {{"levels", {0, "a"}}}}}) == "/setup/levels/1");
  CHECK(pointer_of({{"scenario", "operator_roundtrip"}, {"time", json::object()}}) == "/time");
  CHECK(pointer_of({{"scenario", "pauli_precession"}, {"potential", {{"kind", "cubic"}}}}) == "/potential/kind");
  CHECK(pointer_of({{"scenario", "bohm_double_slit"}, {"extra", 1}}) == "/extra");
  CHECK(pointer_of({{"scenario", "bohm_double_slit"}, {"setup", {{"a/b", 1}}}}) == "/setup/a~1b");
  CHECK(pointer_of({{"scenario", "bohm_double_slit"}, {"time", {{"dt", 0.01}}}}) == "");

  const auto out = scratch("unknown");
  CHECK_THROWS_AS(parse_config({{"scenario", "nope"}, {"output", out.string()}}), SchemaError);
  CHECK_FALSE(fs::exists(out));

  const auto c = parse_config({{"scenario", "uncertainty_survey"}, {"physics", {{"hbar", 2}}}});
  CHECK(c.physics.hbar == 2.0);
  CHECK(c.resolved.at("grid").at("points") == 256);
  CHECK(c.input.size() == 2);
}

TEST_CASE("report relations") {
  ComparisonReport r;
  r.within("a", 1.0, 1.05, 0.1);
  r.at_most("b", 0.5, 1.0);
  r.at_least("c", 2.0, 1.0);
  r.below("d", 1.0, 2.0);
  CHECK(r.pass());
  r.below("e", 2.0, 2.0);
  CHECK_FALSE(r.pass());
  r.entries.pop_back();
  r.within("nan", std::nan(""), 0.0, 1.0);
  CHECK_FALSE(r.entries.back().pass);
  const auto back = ComparisonReport::from_json(r.to_json());
  CHECK(back.entries.size() == r.entries.size());
  CHECK(back.entries[0].abs_diff == doctest::Approx(0.05));
  CHECK_FALSE(back.pass());
}

TEST_CASE("runs are reproducible and self-consistent") {
  const auto a = scratch("rt_a"), b = scratch("rt_b");
  json doc = {{"scenario", "operator_roundtrip"}, {"grid", {{"points", 128}, {"length", 30.0}}}};
  doc["output"] = a.string();
  const auto ra = run(doc);
  CHECK(ra.report.pass());
  doc["output"] = b.string();
  run(doc);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json" || e.path().filename() == "config.json")
      continue;
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / fs::relative(e.path(), a)), e.path().string());
  }
  const auto m = read_json(a / "manifest.json");
  CHECK(m.at("library_version") == kLibraryVersion);
  CHECK(m.at("config").at("scenario") == "operator_roundtrip");
  CHECK(read_json(a / "reduced_operator.json").at("text") == "X^2 P^2 - i hbar X P");

  const auto self = compare_runs(a, a);
  CHECK(self.pass());
  for (const auto& e : self.entries) CHECK(e.abs_diff == 0.0);

  // a rerun into a directory holding an old run replaces it
  doc["output"] = a.string();
  CHECK_NOTHROW(run(doc));
  const auto junk = scratch("junk");
  fs::create_directories(junk);
  std::ofstream(junk / "keep.txt") << "x";
  doc["output"] = junk.string();
  CHECK_THROWS_AS(run(doc), InputError);
  CHECK(fs::exists(junk / "keep.txt"));
}

TEST_CASE("bridge runs converge under grid refinement") {
  std::vector<fs::path> dirs;
  for (int n : {64, 128, 256}) {
    const auto d = scratch("bridge" + std::to_string(n));
    // packet two cells wide on the coarsest grid so the coarse run is visibly under-resolved
    run({{"scenario", "classical_quantum_bridge"},
         {"grid", {{"points", n}, {"length", 20.0}}},
         {"setup", {{"sigma_x", 0.625}, {"sigma_p", 0.63}}},
         {"time", {{"t_final", 0.5}, {"snapshots", 2}}},
         {"output", d.string()}});
    dirs.push_back(d);
  }
  auto l2 = [](const ComparisonReport& r, const std::string& series) {
    for (const auto& e : r.entries)
      if (e.name == "field_l2/" + series) return e.value_a;
    return -1.0;
  };
  const auto c1 = compare_runs(dirs[0], dirs[1]);
  const auto c2 = compare_runs(dirs[1], dirs[2]);
  for (const char* s : {"phase_space", "quantum_density", "classical_density"}) {
    MESSAGE(std::string(s) << " refinement diffs " << l2(c1, s) << " then " << l2(c2, s));
    CHECK(l2(c1, s) > 0.0);
    CHECK(l2(c2, s) < l2(c1, s));
  }
  // argument order does not matter
  CHECK(l2(compare_runs(dirs[1], dirs[0]), "phase_space") == doctest::Approx(l2(c1, "phase_space")));

  const auto free = scratch("bridge_free");
  run({{"scenario", "classical_quantum_bridge"},
       {"grid", {{"points", 64}, {"length", 20.0}}},
       {"potential", {{"kind", "free"}}},
       {"time", {{"t_final", 0.5}, {"snapshots", 2}}},
       {"output", free.string()}});
  CHECK_THROWS_AS(compare_runs(dirs[0], free), IncompatibleRuns);
  CHECK_NOTHROW(compare_runs(dirs[0], free, {{"require_same_physics", false}}));
  CHECK_THROWS_AS(compare_runs(dirs[0], free, {{"bogus", 1}}), SchemaError);

  const auto other = scratch("survey");
  run({{"scenario", "uncertainty_survey"}, {"output", other.string()}});
  CHECK_THROWS_AS(compare_runs(dirs[0], other), IncompatibleRuns);
}

TEST_CASE("plot data export") {
  const auto d = scratch("slit");
  const auto r = run({{"scenario", "bohm_double_slit"},
                      {"grid", {{"points", 512}}},
                      {"setup", {{"seeds", 500}, {"bins", 20}}},
                      {"output", d.string()}});
  const auto csv = export_plot_data(d, "screen_histogram");
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "bin_center,count,density");
  CHECK(slurp(d / "screen_histogram.csv").rfind("bin_center,count,expected\n", 0) == 0);
  CHECK(fs::exists(d / "trajectories" / "bohm.csv"));
  CHECK(fs::exists(d / "trajectories" / "bohm.json"));
  CHECK(fs::exists(d / "fields" / "psi" / "series.json"));

  const auto s = scratch("spread");
  run({{"scenario", "uncertainty_survey"}, {"output", s.string()}});
  std::ifstream u(export_plot_data(s, "uncertainty_vs_time"));
  std::getline(u, header);
  CHECK(header == "t,dx,dp,product");
  try {
    export_plot_data(s, "nothing");
    FAIL("expected MissingQuantity");
  } catch (const MissingQuantity& e) {
    CHECK(e.available() == std::vector<std::string>{"uncertainty_vs_time"});
  }
}

TEST_CASE("every scenario writes the artifact tree") {
  for (const auto& name : scenario_names()) {
    if (name == "bohm_double_slit" || name == "dispersion_free_newton") continue;
    CAPTURE(name);
    const auto d = scratch("tree_" + name);
    const auto r = run({{"scenario", name}, {"output", d.string()}});
    CHECK(r.report.pass());
    for (const char* f : {"config.json", "manifest.json", "report.json", "summary.txt", "observables.json",
                          "quantities.json"})
      CHECK(fs::exists(d / f));
    CHECK(read_json(d / "report.json").at("pass") == r.report.pass());
    for (const auto& e : fs::recursive_directory_iterator(d)) CHECK(e.path().string().rfind(d.string(), 0) == 0);
  }
}
