#include <cmath>

#include "doctest.h"
#include "support/oracles.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/quantum.hpp"
#include "wmbridge/spin.hpp"

using namespace wmb;

namespace {

const PhysicsParams unit{};

Amplitude ground(const Grid1D& g) {
  std::vector<cplx> v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = oracle::hermite_function(0, g.point(j), 1.0, 1.0, 1.0);
  return Amplitude(g, v).normalized();
}

double unwrapped_rate(const std::vector<double>& t, const std::vector<double>& phase) {
  // least-squares slope
  double st = 0, sp = 0, stt = 0, stp = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sp += phase[i];
    stt += t[i] * t[i];
    stp += t[i] * phase[i];
  }
  return (n * stp - st * sp) / (n * stt - st * st);
}

double larmor_rate(double h0) {
  const auto g = Grid1D::centered(64, 16.0);
  const auto algebra = make_spin_algebra(unit);
  auto rho = make_spin_density(ground(g), {1.0, 1.0}, 1.0);
  const auto field = MagneticFieldSpec::uniform({0.0, 0.0, h0});
  std::vector<double> t, phase;
  double last = 0.0, offset = 0.0;
  for (int k = 0; k <= 40; ++k) {
    if (k > 0) rho = evolve_pauli(rho, PotentialSpec::harmonic(1.0), field, unit, 0.05 * k, 0.01);
    const auto m = spin_expectation(rho, algebra);
    double a = std::atan2(m[1], m[0]);
    if (k > 0) {
      while (a + offset - last > M_PI) offset -= 2 * M_PI;
      while (a + offset - last < -M_PI) offset += 2 * M_PI;
    }
    last = a + offset;
    t.push_back(0.05 * k);
    phase.push_back(last);
  }
  return std::abs(unwrapped_rate(t, phase));
}

}  // namespace

TEST_CASE("spin algebra") {
  const auto canonical = make_spin_algebra(unit);
  CHECK(spin_commutator_check(canonical) <= 1e-12);
  for (const auto& m : canonical.m) CHECK((m - m.adjoint()).norm() == 0.0);

  // g = 1 breaks the relation as written by the factor gamma - 1; the scaled
  // structure constant absorbs it
  PhysicsParams half = unit;
  half.g_factor = 1.0;
  const auto a = make_spin_algebra(half);
  const double expected = 0.5 * (0.5 * 0.5) * std::sqrt(2.0);
  CHECK(spin_commutator_check(a, CommutatorForm::as_printed) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(spin_commutator_check(a, CommutatorForm::scaled) <= 1e-12);

  SpinAlgebra zero;
  for (auto& m : zero.m) m.setZero();
  CHECK(spin_commutator_check(zero) == 0.0);
}

TEST_CASE("precession equation") {
  const auto r = precession_rhs({1.0, 0.0, 0.0}, {0.0, 0.0, 1.0});
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 0.0);
  const auto z = precession_rhs({0.0, 0.3, 0.4}, {0.0, 0.6, 0.8});
  for (double c : z) CHECK(std::abs(c) <= 1e-15);

  const Vec3 m0{0.3, -0.5, 0.8};
  const double norm0 = std::sqrt(m0[0] * m0[0] + m0[1] * m0[1] + m0[2] * m0[2]);
  for (const auto& m : integrate_precession(m0, {0.2, 0.7, -1.1}, 10.0, 1e-3))
    CHECK(std::abs(std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) - norm0) <= 1e-9);
}

TEST_CASE("zero field reduces to the scalar equation") {
  const auto g = Grid1D::centered(64, 16.0);
  const auto psi = make_gaussian_amplitude(g, 0.5, 0.8, 1.0, 1.0);
  const std::array<cplx, 2> chi{0.6, cplx(0.0, 0.8)};
  const auto rho = make_spin_density(psi, chi, 1.0);
  const auto out = evolve_pauli(rho, PotentialSpec::quartic(0.05), MagneticFieldSpec::uniform({}), unit, 1.0, 0.01);
  const auto scalar = evolve_density_first_eq(densify(psi, 1.0), PotentialSpec::quartic(0.05), unit, 1.0, 0.01);
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const cplx w = chi[a] * std::conj(chi[b]);
      const auto& p = out.planes()[static_cast<std::size_t>(2 * a + b)];
      for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(p[k] - w * scalar.values()[k]));
    }
  CHECK(worst <= 1e-10);
  CHECK(out.block(0, 0).trace() == doctest::Approx(0.36).epsilon(1e-10));
}

TEST_CASE("Larmor precession") {
  const auto g = Grid1D::centered(64, 16.0);
  const auto algebra = make_spin_algebra(unit);
  const double omega = unit.g_factor * unit.charge / (2.0 * unit.mass * unit.light_speed);
  auto rho = make_spin_density(ground(g), {1.0, 1.0}, 1.0);
  const auto field = MagneticFieldSpec::uniform({0.0, 0.0, 1.0});
  const double amplitude = 0.5 * algebra.gyromagnetic * unit.hbar;
  const double period = 2.0 * M_PI / omega;
  for (int k = 0; k <= 20; ++k) {
    const double t = period * k / 20.0;
    if (k > 0) rho = evolve_pauli(rho, PotentialSpec::harmonic(1.0), field, unit, t, 0.01);
    const auto m = spin_expectation(rho, algebra);
    CHECK(std::abs(m[0] - amplitude * std::cos(omega * t)) <= 1e-4);
    CHECK(std::abs(rho.trace() - 1.0) <= 1e-8);
    CHECK(rho.hermiticity_defect() <= 1e-8);
  }
  const double r1 = larmor_rate(1.0);
  const double r2 = larmor_rate(2.0);
  CHECK(std::abs(r1 - omega) <= 1e-4 * omega);
  CHECK(std::abs(r2 / r1 - 2.0) <= 0.01);
}

TEST_CASE("spin along the field stays put") {
  const auto g = Grid1D::centered(64, 16.0);
  const auto algebra = make_spin_algebra(unit);
  auto rho = make_spin_density(ground(g), {1.0, 0.0}, 1.0);
  const auto m0 = spin_expectation(rho, algebra);
  const auto field = MagneticFieldSpec::uniform({0.0, 0.0, 1.3});
  for (int k = 1; k <= 5; ++k) {
    rho = evolve_pauli(rho, PotentialSpec::harmonic(1.0), field, unit, 0.4 * k, 0.01);
    const auto m = spin_expectation(rho, algebra);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(m[i] - m0[i]) <= 1e-9);
  }
}

TEST_CASE("gradient field keeps invariants and splits the spin states") {
  const auto g = Grid1D::centered(64, 20.0);
  const auto field = MagneticFieldSpec::linear_gradient({0.0, 0.0, 0.5}, {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0.4, 0, 0}});
  const auto psi = make_gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0);
  auto mixed = evolve_pauli(make_spin_density(psi, {1.0, cplx(0.3, 0.5)}, 1.0), PotentialSpec::free_particle(), field,
                            unit, 1.0, 0.01);
  CHECK(std::abs(mixed.trace() - 1.0) <= 1e-8);
  CHECK(mixed.hermiticity_defect() <= 1e-8);

  auto mean_x = [&](const SpinDensityField& r, int s) {
    const auto d = r.block(s, s).diagonal();
    double m = 0.0, w = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      m += g.point(j) * d[j];
      w += d[j];
    }
    return m / w;
  };
  const auto up = evolve_pauli(make_spin_density(psi, {1.0, 0.0}, 1.0), PotentialSpec::free_particle(), field, unit, 1.0, 0.01);
  const auto down = evolve_pauli(make_spin_density(psi, {0.0, 1.0}, 1.0), PotentialSpec::free_particle(), field, unit, 1.0, 0.01);
  // force -d(m.H)/dx = -/+ gamma hbar G / 2, displacement F t^2 / 2m
  CHECK(mean_x(up, 0) == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(mean_x(down, 1) == doctest::Approx(0.1).epsilon(1e-6));

  SpinDensityField broken = mixed;
  auto planes = broken.planes();
  planes[1][3] += 0.1;
  CHECK_THROWS_AS(evolve_pauli(SpinDensityField(g, planes, 1.0), PotentialSpec::free_particle(), field, unit, 0.1, 0.01),
                  DensityFormatError);
}
