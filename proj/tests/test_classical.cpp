#include <cmath>

#include "doctest.h"
#include "wmbridge/classical.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/wigner.hpp"

using namespace wmb;

namespace {

double moment(const PhaseSpaceField& f, int px, int pp) {
  const auto& g = f.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t k = 0; k < g.np(); ++k)
      s += f.at(i, k) * std::pow(g.x_axis().point(i), px) * std::pow(g.p_axis().point(k), pp);
  return s * g.x_axis().spacing() * g.p_axis().spacing();
}

double l2_diff(const PhaseSpaceField& a, const PhaseSpaceField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s += std::pow(a.values()[i] - b.values()[i], 2);
  return std::sqrt(s * a.grid().x_axis().spacing() * a.grid().p_axis().spacing());
}

const PhysicsParams unit{};

}  // namespace

TEST_CASE("free streaming moments") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(256, 40.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 0.0, 0.0, 1.0, 0.5);
  const auto f = evolve_liouville(f0, PotentialSpec::free_particle(), unit, 2.0, 0.05);
  CHECK(moment(f, 2, 0) == doctest::Approx(1.0 + 1.0).epsilon(1e-9));
  CHECK(std::abs(f.total() - 1.0) <= 1e-8);
  CHECK(f.time() == 2.0);
}

TEST_CASE("free streaming equals the exact shear") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(128, 30.0), 1.0);
  const double t = 1.5;
  const auto f = evolve_liouville(make_gaussian_phase_space(ps, -1.0, 0.5, 1.0, 0.6), PotentialSpec::free_particle(),
                                  unit, t, 0.1);
  std::vector<double> exact(f.values().size());
  for (std::size_t i = 0; i < ps.nx(); ++i)
    for (std::size_t k = 0; k < ps.np(); ++k) {
      const double x = ps.x_axis().point(i) - ps.p_axis().point(k) * t;
      const double p = ps.p_axis().point(k);
      exact[i * ps.np() + k] = std::exp(-0.5 * std::pow(x + 1.0, 2) - 0.5 * std::pow((p - 0.5) / 0.6, 2)) / (2 * M_PI * 0.6);
    }
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(exact[i] - f.values()[i]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("harmonic flow returns after one period") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(128, 24.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 2.0, 0.0, 1.0, 1.0);
  const auto f = evolve_liouville(f0, PotentialSpec::harmonic(1.0), unit, 2.0 * M_PI, 2.0 * M_PI / 4000.0);
  CHECK(l2_diff(f, PhaseSpaceField(ps, f0.values(), 2.0 * M_PI)) <= 1e-6);
}

TEST_CASE("quadratic potentials follow characteristics") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(256, 40.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 1.0, 0.5, 1.0, 0.7);
  const double t = 1.0;
  const auto f = evolve_liouville(f0, PotentialSpec::harmonic(1.0), unit, t, 1e-3);
  // pull back each point along the exact harmonic flow
  std::vector<double> exact(f0.values().size());
  for (std::size_t i = 0; i < ps.nx(); ++i)
    for (std::size_t k = 0; k < ps.np(); ++k) {
      const double x = ps.x_axis().point(i);
      const double p = ps.p_axis().point(k);
      const double x0 = x * std::cos(t) - p * std::sin(t);
      const double p0 = p * std::cos(t) + x * std::sin(t);
      exact[i * ps.np() + k] =
          std::exp(-0.5 * std::pow(x0 - 1.0, 2) - 0.5 * std::pow((p0 - 0.5) / 0.7, 2)) / (2 * M_PI * 0.7);
    }
  CHECK(l2_diff(f, PhaseSpaceField(ps, exact, t)) <= 1e-4);
  const auto m = marginals(f);
  for (double v : m.fx) CHECK(v >= -1e-9);
  for (double v : m.fp) CHECK(v >= -1e-9);
}

TEST_CASE("zero-time and backward evolution") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(64, 20.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 0.0, 0.0, 1.0, 1.0);
  CHECK(evolve_liouville(f0, PotentialSpec::harmonic(1.0), unit, 0.0, 0.1).values() == f0.values());
  const auto fwd = evolve_liouville(f0, PotentialSpec::linear(0.3), unit, 1.0, 0.01);
  const auto back = evolve_liouville(fwd, PotentialSpec::linear(0.3), unit, 0.0, 0.01);
  CHECK(l2_diff(back, f0) <= 1e-8);
}

TEST_CASE("stability bound") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(64, 20.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 0.0, 0.0, 1.0, 1.0);
  // p_max = pi / dx ~ 10, L/4 = 5
  CHECK_THROWS_AS(evolve_liouville(f0, PotentialSpec::free_particle(), unit, 1.0, 1.0), StabilityError);
  CHECK_THROWS_AS(evolve_liouville(f0, PotentialSpec::linear(100.0), unit, 0.1, 0.1), StabilityError);
}

TEST_CASE("velocity Verlet trajectories") {
  const auto h = integrate_newton(1.0, 0.0, PotentialSpec::harmonic(1.0), unit, M_PI, 1e-4);
  CHECK(h.states.back().x == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(h.times.back() == doctest::Approx(M_PI));
  for (std::size_t k = 1; k < h.times.size(); ++k) REQUIRE(h.times[k] > h.times[k - 1]);

  const auto free = integrate_newton(0.0, 2.0, PotentialSpec::free_particle(), unit, 1.0, 0.01);
  for (const auto& s : free.states) CHECK(std::abs(s.x - 2.0 * s.t) <= 1e-12);

  const auto lin = integrate_newton(0.0, 1.0, PotentialSpec::linear(0.7), unit, 2.0, 0.01);
  for (const auto& s : lin.states) CHECK(std::abs(s.p - (1.0 - 0.7 * s.t)) <= 1e-9);
}

TEST_CASE("leapfrog energy drift over 1e4 steps") {
  const auto h = integrate_newton(1.0, 0.0, PotentialSpec::harmonic(1.0), unit, 10.0, 1e-3);
  REQUIRE(h.states.size() == 10001);
  const double e0 = 0.5;
  double worst = 0.0;
  for (const auto& s : h.states) worst = std::max(worst, std::abs(0.5 * s.p * s.p + 0.5 * s.x * s.x - e0) / e0);
  CHECK(worst <= 1e-6);
}

TEST_CASE("dispersion-free ensembles") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(256, 40.0), 1.0);
  const auto f = make_dispersion_free({1.3, -0.4, 0.0}, ps);
  CHECK(std::abs(moment(f, 1, 0) - 1.3) <= ps.x_axis().spacing() / 10.0);
  const double vx = moment(f, 2, 0) - std::pow(moment(f, 1, 0), 2);
  const double vp = moment(f, 0, 2) - std::pow(moment(f, 0, 1), 2);
  // 16 dx dp = 16 * 2 pi hbar / n: well under hbar/2
  CHECK(std::sqrt(vx * vp) < 0.5);
  const auto c = make_dispersion_free({0.0, 0.0, 0.0}, ps);
  const std::size_t n = ps.nx();
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t k = 1; k < n; ++k) REQUIRE(c.at(i, k) == doctest::Approx(c.at(n - i, n - k)).epsilon(1e-14));
}
