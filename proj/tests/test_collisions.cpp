#include <cmath>

#include "doctest.h"
#include "wmbridge/classical.hpp"
#include "wmbridge/collisions.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/wigner.hpp"

using namespace wmb;

namespace {

const PhysicsParams unit{};

PhaseSpaceGrid grid(std::size_t n = 32, double length = 20.0) { return PhaseSpaceGrid::dual(Grid1D::centered(n, length), 1.0); }

CoupledEnsembles pair(const PhaseSpaceGrid& g) {
  return {make_gaussian_phase_space(g, -1.0, 1.0, 1.5, 0.7), make_gaussian_phase_space(g, 1.0, -0.5, 2.0, 1.0)};
}

double sum(const std::vector<double>& v, const PhaseSpaceGrid& g) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * g.x_axis().spacing() * g.p_axis().spacing();
}

PhaseSpaceField maxwellian(const PhaseSpaceGrid& g, double temperature, double mass, double weight) {
  std::vector<double> v(g.nx() * g.np());
  for (std::size_t ix = 0; ix < g.nx(); ++ix)
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
      const double x = g.x_axis().point(ix);
      const double p = g.p_axis().point(ip);
      v[ix * g.np() + ip] = weight * std::exp(-x * x / 8.0) * std::exp(-p * p / (2.0 * mass * temperature));
    }
  return PhaseSpaceField(g, v);
}

}  // namespace

TEST_CASE("kernel structure") {
  const auto g = grid();
  const auto k = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, 0.7);
  CHECK(k.symmetric());
  CHECK_NOTHROW(k.validate());
  // equal masses exchange momenta, so every outcome lands on a grid point
  for (const auto& e : k.entries()) {
    CHECK(e.o1 == e.i2);
    CHECK(e.o2 == e.i1);
    CHECK(e.w1 == 1.0);
    CHECK(e.w2 == 1.0);
  }
  const auto u = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 2.0, 0.7);
  CHECK_NOTHROW(u.validate());
  CHECK(u.entries().size() < k.entries().size());

  const auto j = u.to_json();
  CHECK(j.at("m2") == 2.0);
  const auto back = CollisionKernel::from_json(j, g.p_axis(), g.p_axis());
  CHECK(back.entries().size() == u.entries().size());
  const auto other = Grid1D::centered(32, 12.0);
  CHECK_THROWS_AS(CollisionKernel::from_json(j, other, g.p_axis()), SpecError);
  CHECK_THROWS_AS(CollisionKernel::build(g.p_axis(), g.p_axis(), 0.0, 1.0, 1.0), SpecError);
}

TEST_CASE("collision term conservation") {
  const auto g = grid();
  const auto ens = pair(g);
  const auto zero = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, 0.0);
  for (double v : collision_term(ens, zero, 1)) CHECK(v == 0.0);

  for (double m2 : {1.0, 2.0, 0.5}) {
    const auto k = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, m2, 1.0);
    const auto d1 = collision_term(ens, k, 1);
    const auto d2 = collision_term(ens, k, 2);
    CHECK(std::abs(sum(d1, g)) <= 1e-10);
    CHECK(std::abs(sum(d2, g)) <= 1e-10);
    // total momentum is exact for every mass ratio
    double mom = 0.0;
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
      for (std::size_t ip = 0; ip < g.np(); ++ip)
        mom += g.p_axis().point(ip) * (d1[ix * g.np() + ip] + d2[ix * g.np() + ip]);
    CHECK(std::abs(mom) <= 1e-10);
  }
  CHECK_THROWS_AS(collision_term(ens, zero, 3), InputError);
  const auto g2 = grid(32, 16.0);
  const auto mismatched = CollisionKernel::build(g2.p_axis(), g.p_axis(), 1.0, 1.0, 1.0);
  CHECK_THROWS_AS(collision_term(ens, mismatched, 1), GridMismatch);
}

TEST_CASE("detailed balance between equal-temperature Maxwellians") {
  const auto g = grid();
  const double strength = 2.5;
  const auto k = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, strength);
  const CoupledEnsembles eq{maxwellian(g, 0.8, 1.0, 0.05), maxwellian(g, 0.8, 1.0, 0.11)};
  for (int s = 1; s <= 2; ++s)
    for (double v : collision_term(eq, k, s)) CHECK(std::abs(v) <= 1e-8 * strength);
}

TEST_CASE("coupled evolution") {
  const auto g = grid();
  const auto ens = pair(g);
  const auto off = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, 0.0);
  const auto harmonic = PotentialSpec::harmonic(0.5);
  const auto a = evolve_coupled(ens, harmonic, PotentialSpec::free_particle(), off, unit, 1.0, 0.02);
  const auto l1 = evolve_liouville(ens.f1, harmonic, unit, 1.0, 0.02);
  const auto l2 = evolve_liouville(ens.f2, PotentialSpec::free_particle(), unit, 1.0, 0.02);
  CHECK(a.f1.values() == l1.values());
  CHECK(a.f2.values() == l2.values());

  const auto on = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, 1.0);
  const auto b = evolve_coupled(ens, PotentialSpec::free_particle(), PotentialSpec::free_particle(), on, unit, 1.0, 0.01);
  const auto s1 = species_moments(ens.f1, 1.0), s2 = species_moments(ens.f2, 1.0);
  const auto e1 = species_moments(b.f1, 1.0), e2 = species_moments(b.f2, 1.0);
  CHECK(std::abs(e1.number - s1.number) <= 1e-7);
  CHECK(std::abs(e2.number - s2.number) <= 1e-7);
  CHECK(std::abs(e1.momentum + e2.momentum - s1.momentum - s2.momentum) <= 1e-6);
  CHECK(std::abs(e1.kinetic_energy + e2.kinetic_energy - s1.kinetic_energy - s2.kinetic_energy) <= 1e-5);
  // the collisions did something
  CHECK(std::abs(e1.momentum - s1.momentum) > 1e-3);

  CHECK_THROWS_AS(evolve_coupled(ens, harmonic, harmonic, on, unit, 1.0, 0.2), StabilityError);
}

TEST_CASE("entropy grows under collisions alone") {
  const auto g = grid();
  auto ens = pair(g);
  const auto k = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, 1.0);
  const double h = 0.02;
  double last = coupled_entropy(ens);
  for (int s = 0; s < 25; ++s) {
    auto a = ens.f1.values();
    auto b = ens.f2.values();
    const auto d1 = collision_term(ens, k, 1);
    const auto d2 = collision_term(ens, k, 2);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += h * d1[i];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += h * d2[i];
    ens = {PhaseSpaceField(g, a), PhaseSpaceField(g, b)};
    const double now = coupled_entropy(ens);
    CHECK(now >= last - 1e-8);
    last = now;
  }
}

TEST_CASE("collision term in the density representation") {
  const auto g = grid();
  const auto ens = pair(g);
  const auto off = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, 0.0);
  for (const auto& v : transformed_collision_rhs(ens, off, 1).values()) CHECK(std::abs(v) == 0.0);

  const auto k = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.5, 1.0);
  for (int s = 1; s <= 2; ++s) {
    const auto r = transformed_collision_rhs(ens, k, s);
    CHECK(std::abs(r.trace()) <= 1e-10);
    CHECK(r.hermiticity_defect() <= 1e-10);
  }
}

TEST_CASE("collisions erode off-diagonal coherence") {
  const auto g = grid(64, 40.0);
  const CoupledEnsembles ens{make_gaussian_phase_space(g, 0.0, 0.5, 2.0, 0.4),
                             make_gaussian_phase_space(g, 0.0, -0.5, 2.0, 1.5)};
  // column at dx = 3
  const auto idx = static_cast<std::size_t>(g.nx() / 2 + std::llround(3.0 / g.x_axis().spacing()));
  auto ratio = [&](double strength) {
    const auto k = CollisionKernel::build(g.p_axis(), g.p_axis(), 1.0, 1.0, strength);
    const auto out = evolve_coupled(ens, PotentialSpec::free_particle(), PotentialSpec::free_particle(), k, unit, 1.0, 0.02);
    return offdiagonal_norm(wigner_moyal_forward(out.f1), idx) / offdiagonal_norm(wigner_moyal_forward(ens.f1), idx);
  };
  const double free = ratio(0.0);
  const double coupled = ratio(1.0);
  MESSAGE("off-diagonal ratio " << coupled << " with collisions, " << free << " without");
  CHECK(coupled < free);
}
