#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wmbridge/errors.hpp"
#include "wmbridge/io.hpp"
#include "wmbridge/quantum.hpp"
#include "wmbridge/wigner.hpp"

using namespace wmb;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wmb_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("field files round trip exactly") {
  const auto dir = scratch("fields");
  const auto g = Grid1D::centered(32, 12.0);
  const auto ps = PhaseSpaceGrid::dual(g, 1.0);
  const auto f = make_gaussian_phase_space(ps, 0.5, -0.3, 1.0, 1.2);
  write_field(dir / "f.wmf", f, 2.0);
  const auto f2 = read_phase_space_field(dir / "f.wmf");
  CHECK(f2.values() == f.values());
  CHECK(f2.grid() == f.grid());
  CHECK(fs::file_size(dir / "f.wmf") == 32 * 32 * 8);

  const auto psi = make_gaussian_amplitude(g, 0.2, 0.7, 1.1, 1.0);
  write_field(dir / "psi.wmf", psi, 1.0, 1.0);
  CHECK(read_amplitude(dir / "psi.wmf").values() == psi.values());
  CHECK(fs::file_size(dir / "psi.wmf") == 32 * 16);

  const auto rho = densify(psi, 1.0);
  write_field(dir / "rho.wmf", rho, 1.0);
  const auto rho2 = read_density_field(dir / "rho.wmf");
  CHECK(rho2.values() == rho.values());
  CHECK(rho2.grid_y() == rho.grid_y());

  const auto spin = make_spin_density(psi, {0.6, cplx(0.0, 0.8)}, 1.0);
  write_field(dir / "spin.wmf", spin, 1.0);
  const auto spin2 = read_spin_density(dir / "spin.wmf");
  for (std::size_t b = 0; b < 4; ++b) CHECK(spin2.planes()[b] == spin.planes()[b]);

  const auto side = read_json(dir / "spin.wmf.json");
  CHECK(side.at("block_order") == nlohmann::json({"uu", "ud", "du", "dd"}));
  for (const char* key : {"axes", "spacing", "origin", "time", "kind", "hbar", "mass"}) CHECK(side.contains(key));
  CHECK(read_json(dir / "f.wmf.json").at("mass") == 2.0);
  CHECK(read_json(dir / "f.wmf.json").at("dtype") == "float64");

  // raw payload is little-endian float64, real then imaginary
  std::ifstream in(dir / "psi.wmf", std::ios::binary);
  double first[2];
  in.read(reinterpret_cast<char*>(first), sizeof first);
  CHECK(first[0] == psi.values()[0].real());
  CHECK(first[1] == psi.values()[0].imag());
}

TEST_CASE("field reader rejects mismatched payloads") {
  const auto dir = scratch("bad");
  const auto g = Grid1D::centered(16, 8.0);
  write_field(dir / "psi.wmf", make_gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0), 1.0, 1.0);
  fs::resize_file(dir / "psi.wmf", 100);
  CHECK_THROWS_AS(read_amplitude(dir / "psi.wmf"), InputError);
  CHECK_THROWS_AS(read_amplitude(dir / "missing.wmf"), InputError);
  write_field(dir / "ok.wmf", make_gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0), 1.0, 1.0);
  CHECK_THROWS_AS(read_density_field(dir / "ok.wmf"), InputError);
}

TEST_CASE("series directory") {
  const auto dir = scratch("series");
  const auto g = Grid1D::centered(16, 8.0);
  auto psi = make_gaussian_amplitude(g, 0.0, 1.0, 1.0, 1.0);
  SeriesWriter w(dir / "s", 0.1, "amplitude_split_operator", {{"note", "x"}}, 1.0);
  for (int k = 0; k < 3; ++k) {
    w.add(psi, 1.0);
    psi = evolve_amplitude_second_eq(psi, PotentialSpec::free_particle(), PhysicsParams{}, 0.1 * (k + 1), 0.05);
  }
  w.finish();
  const auto s = read_json(dir / "s" / "series.json");
  CHECK(s.at("count") == 3);
  CHECK(s.at("dt") == 0.1);
  CHECK(s.at("solver") == "amplitude_split_operator");
  CHECK(s.at("files")[2] == "000002.wmf");
  CHECK(read_amplitude(dir / "s" / "000002.wmf").time() == doctest::Approx(0.2));
}

TEST_CASE("csv outputs") {
  const auto dir = scratch("csv");
  TrajectoryBundle b;
  b.times = {0.0, 0.5};
  b.n_trajectories = 2;
  b.flagged = {0, 1};
  b.states = {{1.0, 0.0, 0.0}, {1.25, 0.5, 0.5}, {-1.0, 0.0, 0.0}, {-1.5, -1.0, 0.5}};
  write_trajectories(dir / "t.csv", b);
  CHECK(slurp(dir / "t.csv") == "t,x,p\n0,1,0\n0.5,1.25,0.5\n0,-1,0\n0.5,-1.5,-1\n");
  const auto m = read_json(dir / "t.json");
  CHECK(m.at("n_trajectories") == 2);
  CHECK(m.at("flagged") == 1);

  ScreenHistogram h;
  h.bin_center = {-1.0, 1.0};
  h.count = {3.0, 5.0};
  h.expected = {4.0, 4.0};
  write_screen_histogram(dir / "h.csv", h);
  CHECK(slurp(dir / "h.csv") == "bin_center,count,expected\n-1,3,4\n1,5,4\n");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
}
