#include <cmath>

#include "doctest.h"
#include "support/oracles.hpp"
#include "wmbridge/classical.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/quantum.hpp"
#include "wmbridge/wigner.hpp"

using namespace wmb;

namespace {

const PhysicsParams unit{};

double l2(const std::vector<cplx>& a, const std::vector<cplx>& b, double cell) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * cell);
}

Amplitude relaxed_state(const Grid1D& g, const PotentialSpec& v, int order) {
  const auto h = oracle::dense_hamiltonian(g.size(), g.length(), sample_potential(v, g, 1.0), 1.0, 1.0);
  const auto states = oracle::relax(h, static_cast<std::size_t>(order) + 1, g.spacing());
  const auto& s = states.back().psi;
  return Amplitude(g, std::vector<cplx>(s.begin(), s.end()));
}

double variance_x(const Amplitude& psi) {
  const auto& g = psi.grid();
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    m1 += std::norm(psi.values()[j]) * g.point(j);
    m2 += std::norm(psi.values()[j]) * g.point(j) * g.point(j);
  }
  m1 *= g.spacing();
  m2 *= g.spacing();
  return m2 - m1 * m1;
}

}  // namespace

TEST_CASE("oracle eigenstates agree with Hermite functions") {
  const auto g = Grid1D::centered(128, 20.0);
  const auto h = oracle::dense_hamiltonian(128, 20.0, sample_potential(PotentialSpec::harmonic(1.0), g, 1.0), 1.0, 1.0);
  const auto states = oracle::relax(h, 3, g.spacing());
  for (int n = 0; n < 3; ++n) {
    CHECK(states[n].energy == doctest::Approx(n + 0.5).epsilon(1e-9));
    for (std::size_t j = 0; j < 128; ++j)
      REQUIRE(std::abs(states[n].psi[j] - oracle::hermite_function(n, g.point(j), 1, 1, 1)) <= 1e-7);
  }
}

TEST_CASE("densify structure") {
  const auto g = Grid1D::centered(128, 30.0);
  const auto psi = make_gaussian_amplitude(g, 0.5, 1.3, 1.0, 1.0);
  const auto rho = densify(psi, 1.0);
  CHECK(rho.hermiticity_defect() <= 1e-12);
  const auto diag = rho.diagonal();
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(diag[j] == std::norm(psi.values()[j]));
  CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
  // phase slope along dx is p0/hbar
  const std::size_t c = rho.diagonal_column();
  const std::size_t ix = 66;
  const double slope = std::arg(rho.at(ix, c + 1) * std::conj(rho.at(ix, c - 1))) / (2.0 * g.spacing());
  CHECK(std::abs(slope - 1.3) <= 0.013);
  // odd offsets sample the half-shifted points
  const double x = g.point(ix);
  const double y = x + 1.5 * g.spacing();
  const double yp = x - 1.5 * g.spacing();
  auto analytic = [](double z) {
    return std::polar(std::pow(2.0 * M_PI, -0.25) * std::exp(-0.25 * (z - 0.5) * (z - 0.5)), 1.3 * z);
  };
  CHECK(std::abs(rho.at(ix, c + 3) - std::conj(analytic(yp)) * analytic(y)) <= 1e-10);
}

TEST_CASE("amplitude solver: free spreading, norm, momentum") {
  const auto g = Grid1D::centered(512, 80.0);
  const auto psi0 = make_gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0);
  const auto psi = evolve_amplitude_second_eq(psi0, PotentialSpec::free_particle(), unit, 2.0, 0.01);
  CHECK(std::abs(variance_x(psi) - 2.0) <= 1e-4);
  CHECK(std::abs(psi.norm_squared() - 1.0) <= 1e-10);

  const auto moving = make_gaussian_amplitude(g, -5.0, 1.5, 1.0, 1.0);
  const double p_start = oracle::momentum_moment(moving.values(), g.length(), 1.0, 1);
  const auto later = evolve_amplitude_second_eq(moving, PotentialSpec::free_particle(), unit, 2.0, 0.01);
  CHECK(std::abs(oracle::momentum_moment(later.values(), g.length(), 1.0, 1) - p_start) <= 1e-10);
}

TEST_CASE("harmonic coherent state follows the cosine") {
  const auto g = Grid1D::centered(256, 30.0);
  const auto psi0 = make_gaussian_amplitude(g, 1.0, 0.0, std::sqrt(0.5), 1.0);
  for (double t : {0.5, 1.7, 3.0}) {
    const auto psi = evolve_amplitude_second_eq(psi0, PotentialSpec::harmonic(1.0), unit, t, 1e-3);
    CHECK(std::abs(oracle::position_moment(psi.values(), g.length(), 1) - std::cos(t)) <= 1e-5);
  }
}

TEST_CASE("norm and trace drift over 1e3 steps") {
  const auto g = Grid1D::centered(128, 20.0);
  const auto psi0 = make_gaussian_amplitude(g, 1.0, 0.5, 1.0, 1.0);
  const auto psi = evolve_amplitude_second_eq(psi0, PotentialSpec::quartic(0.05), unit, 1.0, 1e-3);
  CHECK(std::abs(psi.norm_squared() - 1.0) <= 1e-10);
  const auto rho = evolve_density_first_eq(densify(psi0, 1.0), PotentialSpec::quartic(0.05), unit, 1.0, 1e-3);
  CHECK(std::abs(rho.trace() - 1.0) <= 1e-8);
  CHECK(rho.hermiticity_defect() <= 1e-8);
}

TEST_CASE("density ground state is stationary over one period") {
  const auto g = Grid1D::centered(128, 20.0);
  const auto psi0 = relaxed_state(g, PotentialSpec::harmonic(1.0), 0);
  const auto rho0 = densify(psi0, 1.0);
  const auto rho = evolve_density_first_eq(rho0, PotentialSpec::harmonic(1.0), unit, 2.0 * M_PI, 2.0 * M_PI / 2000.0);
  CHECK(l2(rho.values(), rho0.values(), g.spacing() * g.spacing()) <= 1e-6);
}

TEST_CASE("consistency square for a free Gaussian") {
  const auto g = Grid1D::centered(256, 40.0);
  const auto psi0 = make_gaussian_amplitude(g, -1.0, 0.8, 1.0, 1.0);
  const auto a = evolve_density_first_eq(densify(psi0, 1.0), PotentialSpec::free_particle(), unit, 1.0, 0.01);
  const auto b = densify(evolve_amplitude_second_eq(psi0, PotentialSpec::free_particle(), unit, 1.0, 0.01), 1.0);
  CHECK(l2(a.values(), b.values(), g.spacing() * g.spacing()) <= 1e-6);
}

TEST_CASE("time reversal and zero-time identity") {
  const auto g = Grid1D::centered(128, 20.0);
  const auto rho0 = densify(make_gaussian_amplitude(g, 1.0, 0.5, 1.0, 1.0), 1.0);
  const auto v = PotentialSpec::quartic(0.1);
  const auto fwd = evolve_density_first_eq(rho0, v, unit, 1.0, 1e-2);
  const auto back = evolve_density_first_eq(fwd, v, unit, 0.0, 1e-2);
  CHECK(l2(back.values(), rho0.values(), g.spacing() * g.spacing()) <= 1e-8);
  CHECK(evolve_density_first_eq(rho0, v, unit, 0.0, 1e-2).values() == rho0.values());
  auto bad = rho0.values();
  bad[5 * 128 + 80] += 1e-3;
  CHECK_THROWS_AS(evolve_density_first_eq(DensityField(g, bad, 1.0), v, unit, 1.0, 0.01), DensityFormatError);
  CHECK_THROWS_AS(evolve_density_first_eq(rho0, v, unit, 1.0, 2.0), StabilityError);
}

TEST_CASE("bridge equivalence against the Liouville flow") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(256, 40.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 1.0, 0.5, 1.0, 0.8);
  const double cell = ps.x_axis().spacing() * ps.x_axis().spacing();
  for (const auto& v : {PotentialSpec::free_particle(), PotentialSpec::linear(0.5), PotentialSpec::harmonic(1.0)}) {
    const auto classical = wigner_moyal_forward(evolve_liouville(f0, v, unit, 1.0, 1e-2));
    const auto quantum = evolve_density_first_eq(wigner_moyal_forward(f0), v, unit, 1.0, 1e-2);
    CHECK(l2(classical.values(), quantum.values(), cell) <= 1e-4);
  }
  const auto quartic = PotentialSpec::quartic(0.05);
  const auto classical = wigner_moyal_forward(evolve_liouville(f0, quartic, unit, 1.0, 1e-3));
  const auto quantum = evolve_density_first_eq(wigner_moyal_forward(f0), quartic, unit, 1.0, 1e-3);
  CHECK(l2(classical.values(), quantum.values(), cell) > 1e-2);
}

TEST_CASE("Madelung decomposition") {
  const auto g = Grid1D::centered(256, 40.0);
  const auto real = make_gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0);
  const auto m0 = madelung_decompose(real, unit);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(m0.s_field[j] == 0.0);
    CHECK(std::abs(m0.velocity[j]) <= 1e-12);
  }
  double r2 = 0.0;
  for (double r : m0.r_field) r2 += r * r * g.spacing();
  CHECK(std::abs(r2 - 1.0) <= 1e-9);

  const auto wave = make_gaussian_amplitude(g, 0.0, 1.7, 2.0, 1.0);
  const auto mw = madelung_decompose(wave, unit);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (mw.node_mask[j]) continue;
    if (std::abs(g.point(j)) <= 0.25 * g.length()) CHECK(std::abs(mw.velocity[j] - 1.7) <= 1e-8);
    const cplx rebuilt = std::polar(mw.r_field[j], mw.s_field[j]);
    CHECK(std::abs(rebuilt - wave.values()[j]) <= 1e-6 * std::abs(wave.values()[j]));
  }

  std::vector<cplx> first(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) first[j] = oracle::hermite_function(1, g.point(j), 1, 1, 1);
  // the sample at x = 0 is an exact node
  const auto m1 = madelung_decompose(Amplitude(g, first).normalized(), unit);
  CHECK(m1.node_mask[128] == 1);
  for (double v : m1.velocity) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("continuity residual") {
  const auto g = Grid1D::centered(256, 20.0);
  const auto psi0 = make_gaussian_amplitude(g, -1.0, 0.5, 1.0, 1.0);
  const auto series = amplitude_series(psi0, PotentialSpec::free_particle(), unit, 1e-3, 1, 11);
  CHECK(continuity_residual(series, unit).l2_residual <= 1e-3);

  const auto eig = relaxed_state(g, PotentialSpec::harmonic(1.0), 0);
  std::vector<Amplitude> stationary;
  for (int k = 0; k < 4; ++k) {
    std::vector<cplx> v(eig.values());
    for (auto& c : v) c *= std::polar(1.0, -0.5 * 0.1 * k);
    stationary.emplace_back(g, v, 0.1 * k);
  }
  CHECK(continuity_residual(stationary, unit).l2_residual <= 1e-9);
  CHECK_THROWS_AS(continuity_residual({psi0, psi0}, unit), InputError);
}

TEST_CASE("continuity residual converges at second order") {
  double prev = 0.0;
  for (std::size_t level = 0; level < 2; ++level) {
    const std::size_t n = 128u << level;
    const double dt = 0.02 / static_cast<double>(1u << level);
    const auto g = Grid1D::centered(n, 30.0);
    const auto psi0 = make_gaussian_amplitude(g, -1.0, 1.0, 1.0, 1.0);
    const std::size_t stride = 1u << level;
    const auto series = amplitude_series(psi0, PotentialSpec::free_particle(), unit, dt, 1, 2 * stride + 1);
    std::vector<Amplitude> three{series[stride - 1], series[stride], series[stride + 1]};
    const double r = continuity_residual(three, unit).l2_residual;
    if (level == 1) {
      MESSAGE("continuity ratio " << r / prev);
      CHECK(r / prev >= 0.2);
      CHECK(r / prev <= 0.3);
    }
    prev = r;
  }
}

TEST_CASE("Hamilton-Jacobi residual") {
  const auto g = Grid1D::centered(256, 40.0);
  const auto eig = relaxed_state(g, PotentialSpec::harmonic(1.0), 0);
  std::vector<cplx> dot(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) dot[j] = cplx(0.0, -0.5) * eig.values()[j];
  CHECK(hamilton_jacobi_residual(eig, dot, PotentialSpec::harmonic(1.0), unit).linf_residual <= 1e-4);
  CHECK_THROWS_AS(hamilton_jacobi_residual(eig, std::vector<cplx>(3), PotentialSpec::free_particle(), unit), InputError);

  // free Gaussian at t = 0 against a finite-difference time derivative
  const auto psi0 = make_gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0);
  const double h = 1e-4;
  const auto ahead = evolve_amplitude_second_eq(psi0, PotentialSpec::free_particle(), unit, h, h);
  const auto behind = evolve_amplitude_second_eq(psi0, PotentialSpec::free_particle(), unit, -h, h);
  std::vector<cplx> fd(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) fd[j] = (ahead.values()[j] - behind.values()[j]) / (2.0 * h);
  CHECK(hamilton_jacobi_residual(psi0, fd, PotentialSpec::free_particle(), unit).l2_residual <= 1e-3);
}

TEST_CASE("Hamilton-Jacobi residual converges at second order") {
  double prev = 0.0;
  for (std::size_t level = 0; level < 2; ++level) {
    const std::size_t n = 256u << level;
    const double dt = 0.02 / static_cast<double>(1u << level);
    const auto g = Grid1D::centered(n, 30.0);
    const auto psi0 = make_gaussian_amplitude(g, -1.0, 1.0, 1.0, 1.0);
    const auto series = amplitude_series(psi0, PotentialSpec::free_particle(), unit, dt, 1, 3);
    std::vector<cplx> dot(n);
    for (std::size_t j = 0; j < n; ++j) dot[j] = (series[2].values()[j] - series[0].values()[j]) / (2.0 * dt);
    const double r =
        hamilton_jacobi_residual(series[1], dot, PotentialSpec::free_particle(), unit, Differencing::centered).l2_residual;
    if (level == 1) {
      MESSAGE("hamilton-jacobi ratio " << r / prev);
      CHECK(r / prev >= 0.2);
      CHECK(r / prev <= 0.3);
    }
    prev = r;
  }
}

TEST_CASE("two-particle evolution") {
  const auto g = Grid1D::centered(32, 12.0);
  const auto a = make_gaussian_amplitude(g, -1.0, 0.3, 1.0, 1.0);
  const auto b = make_gaussian_amplitude(g, 1.0, -0.2, 1.0, 1.0);
  const auto rho2 = densify_pair(a, b, 1.0);
  CHECK(rho2.trace() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(evolve_density_two_particle(rho2, PotentialSpec::harmonic(0.5), PotentialSpec::free_particle(), unit, 0.0, 0.01)
            .values() == rho2.values());

  const auto ext = PotentialSpec::harmonic(0.5);
  const auto sep = evolve_density_two_particle(rho2, ext, PotentialSpec::free_particle(), unit, 0.5, 0.01);
  const auto ra = evolve_density_first_eq(densify(a, 1.0), ext, unit, 0.5, 0.01);
  const auto rb = evolve_density_first_eq(densify(b, 1.0), ext, unit, 0.5, 0.01);
  const std::size_t n2 = g.size() * g.size();
  std::vector<cplx> product(n2 * n2);
  for (std::size_t i = 0; i < n2; ++i)
    for (std::size_t k = 0; k < n2; ++k) product[i * n2 + k] = ra.values()[i] * rb.values()[k];
  const double cell = std::pow(g.spacing(), 4);
  CHECK(l2(sep.values(), product, cell) <= 1e-6);
  CHECK(std::abs(sep.trace() - 1.0) <= 1e-7);
  CHECK(sep.hermiticity_defect() <= 1e-7);

  CHECK_THROWS_AS(DensityField2(Grid1D::centered(128, 10.0), {}, 1.0), MemoryGuardError);
}

TEST_CASE("pair potential separates the centre of mass") {
  const auto g = Grid1D::centered(32, 16.0);
  const double s0 = 1.0;
  const auto a = make_gaussian_amplitude(g, 0.0, 0.0, s0, 1.0);
  const auto rho2 = densify_pair(a, a, 1.0);
  const double t = 1.0;
  const auto out =
      evolve_density_two_particle(rho2, PotentialSpec::free_particle(), PotentialSpec::harmonic(0.7), unit, t, 0.01);
  CHECK(std::abs(out.trace() - 1.0) <= 1e-7);
  CHECK(out.hermiticity_defect() <= 1e-7);
  const auto p = out.diagonal();
  const std::size_t n = g.size();
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double xc = 0.5 * (g.point(i) + g.point(k));
      m1 += p[i * n + k] * xc;
      m2 += p[i * n + k] * xc * xc;
    }
  const double cell = g.spacing() * g.spacing();
  const double var = (m2 - m1 * m1 * cell) * cell;
  // free particle of mass 2m starting from width s0/sqrt(2)
  const double sc2 = 0.5 * s0 * s0;
  const double expected = sc2 + std::pow(t / (2.0 * 2.0 * std::sqrt(sc2)), 2);
  CHECK(std::abs(var - expected) <= 1e-4);
}
