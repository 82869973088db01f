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

Amplitude eigen_amplitude(const Grid1D& g, int order) {
  std::vector<cplx> v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = oracle::hermite_function(order, g.point(j), 1.0, 1.0, 1.0);
  return Amplitude(g, v).normalized();
}

}  // namespace

TEST_CASE("forward transform structure") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(128, 30.0), 1.0);
  const auto f = make_gaussian_phase_space(ps, 0.5, -0.3, 1.0, 0.8);
  const auto rho = wigner_moyal_forward(f);
  CHECK(rho.hermiticity_defect() <= 1e-12);
  const auto m = marginals(f);
  const auto diag = rho.diagonal();
  for (std::size_t i = 0; i < diag.size(); ++i) CHECK(std::abs(diag[i] - m.fx[i]) <= 1e-10);
  CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));

  // Parseval: sum |rho|^2 dx d(dx) = 2 pi hbar sum F^2 dx dp
  double lhs = 0.0;
  double rhs = 0.0;
  for (const auto& v : rho.values()) lhs += std::norm(v);
  for (double v : f.values()) rhs += v * v;
  const double dx = ps.x_axis().spacing();
  lhs *= dx * dx;
  rhs *= 2.0 * M_PI * dx * ps.p_axis().spacing();
  CHECK(std::abs(lhs - rhs) <= 1e-8);
}

TEST_CASE("forward transform is linear") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(64, 20.0), 1.0);
  const auto f1 = make_gaussian_phase_space(ps, 1.0, 0.0, 1.0, 0.8);
  const auto f2 = make_gaussian_phase_space(ps, -2.0, 1.0, 1.5, 0.7);
  std::vector<double> mix(f1.values().size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.3 * f1.values()[i] - 1.7 * f2.values()[i];
  const auto r = wigner_moyal_forward(PhaseSpaceField(ps, mix));
  const auto r1 = wigner_moyal_forward(f1);
  const auto r2 = wigner_moyal_forward(f2);
  for (std::size_t i = 0; i < mix.size(); ++i)
    REQUIRE(std::abs(r.values()[i] - (0.3 * r1.values()[i] - 1.7 * r2.values()[i])) <= 1e-14);
}

TEST_CASE("uniform momentum profile maps to the diagonal column only") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(32, 8.0), 1.0);
  std::vector<double> v(32 * 32, 1.0);
  const auto rho = wigner_moyal_forward(PhaseSpaceField(ps, v));
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t m = 0; m < 32; ++m) {
      if (m == rho.diagonal_column())
        CHECK(std::abs(rho.at(i, m) - ps.p_axis().length()) <= 1e-12);
      else
        CHECK(std::abs(rho.at(i, m)) <= 1e-12);
    }
}

TEST_CASE("dispersion-free phase slope recovers p0") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(256, 40.0), 1.0);
  const double p0 = 1.7;
  const auto rho = wigner_moyal_forward(make_dispersion_free({0.0, p0, 0.0}, ps));
  const std::size_t ix = 128;
  const std::size_t c = rho.diagonal_column();
  const double slope = std::arg(rho.at(ix, c + 1) * std::conj(rho.at(ix, c - 1))) / (2.0 * ps.x_axis().spacing());
  CHECK(std::abs(slope - p0) <= 0.01 * p0);
}

TEST_CASE("round trip and rejection of non-Hermitian input") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(128, 30.0), 1.0);
  const auto f = make_gaussian_phase_space(ps, 0.5, -0.3, 1.0, 0.8);
  const auto back = wigner_inverse(wigner_moyal_forward(f));
  double worst = 0.0;
  for (std::size_t i = 0; i < f.values().size(); ++i) worst = std::max(worst, std::abs(back.values()[i] - f.values()[i]));
  CHECK(worst <= 1e-10);
  CHECK(kInverseLabel == "diagnostic, outside paper formalism");

  auto vals = wigner_moyal_forward(f).values();
  vals[3 * 128 + 70] += cplx(0.0, 1e-3);
  CHECK_THROWS_AS(wigner_inverse(DensityField(ps.x_axis(), vals, 1.0)), DensityFormatError);

  const auto skew = PhaseSpaceGrid(Grid1D::centered(128, 30.0), Grid1D::centered(128, 10.0), 1.0);
  CHECK_THROWS_AS(wigner_moyal_forward(make_gaussian_phase_space(skew, 0, 0, 1, 1)), GridResolutionError);
}

TEST_CASE("negativity of quantum states") {
  const auto g = Grid1D::centered(128, 20.0);
  const auto w0 = wigner_inverse(densify(eigen_amplitude(g, 0), 1.0));
  CHECK(w0.min_value() >= -1e-9);
  CHECK(negativity_report(w0).negative_mass_fraction <= 1e-9);
  const auto w1 = wigner_inverse(densify(eigen_amplitude(g, 1), 1.0));
  const auto rep = negativity_report(w1);
  CHECK(rep.min_value < 0.0);
  CHECK(rep.negative_mass_fraction > 0.05);
  // most negative point of the first excited state sits at the origin
  CHECK(std::abs(rep.x) <= g.spacing());
  CHECK(std::abs(rep.p) <= PhaseSpaceGrid::dual(g, 1.0).p_axis().spacing());

  const auto ps = PhaseSpaceGrid::dual(g, 1.0);
  CHECK(negativity_report(make_gaussian_phase_space(ps, 0, 0, 1, 1)).negative_mass_fraction == 0.0);

  // cat state versus the equal mixture of its two branches
  const auto a = make_gaussian_amplitude(g, -3.0, 0.0, 0.7, 1.0);
  const auto b = make_gaussian_amplitude(g, 3.0, 0.0, 0.7, 1.0);
  std::vector<cplx> cat(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) cat[j] = a.values()[j] + b.values()[j];
  const auto pure = negativity_report(wigner_inverse(densify(Amplitude(g, cat).normalized(), 1.0)));
  const auto ra = densify(a, 1.0);
  const auto rb = densify(b, 1.0);
  std::vector<cplx> mixed(ra.values().size());
  for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = 0.5 * (ra.values()[i] + rb.values()[i]);
  const auto mixture = negativity_report(wigner_inverse(DensityField(g, mixed, 1.0)));
  CHECK(mixture.negative_mass_fraction < pure.negative_mass_fraction);
}

TEST_CASE("free evolution leaves the momentum marginal unchanged") {
  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(128, 30.0), 1.0);
  const auto f0 = make_gaussian_phase_space(ps, 0.0, 0.3, 1.0, 0.8);
  const auto f = evolve_liouville(f0, PotentialSpec::free_particle(), unit, 1.0, 0.1);
  const auto m0 = marginals(f0);
  const auto m1 = marginals(f);
  double sx = 0.0;
  double sp = 0.0;
  for (std::size_t k = 0; k < m0.fp.size(); ++k) {
    CHECK(std::abs(m0.fp[k] - m1.fp[k]) <= 1e-13);
    sp += m1.fp[k] * ps.p_axis().spacing();
    sx += m1.fx[k] * ps.x_axis().spacing();
  }
  CHECK(std::abs(sx - 1.0) <= 1e-9);
  CHECK(std::abs(sp - 1.0) <= 1e-9);
}
