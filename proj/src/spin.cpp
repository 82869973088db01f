#include "wmbridge/spin.hpp"

#include <cmath>

#include "wmbridge/classical.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"
#include "wmbridge/quantum.hpp"

namespace wmb {

namespace {

constexpr cplx kI{0.0, 1.0};

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

std::array<Eigen::Matrix2cd, 3> pauli() {
  std::array<Eigen::Matrix2cd, 3> s;
  s[0] << 0.0, 1.0, 1.0, 0.0;
  s[1] << 0.0, -kI, kI, 0.0;
  s[2] << 1.0, 0.0, 0.0, -1.0;
  return s;
}

// exp(-i theta n.sigma) for the vector a = theta n
Eigen::Matrix2cd su2(const Vec3& a) {
  const double theta = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (theta == 0.0) return u;
  const auto s = pauli();
  const double c = std::cos(theta);
  const double sn = std::sin(theta) / theta;
  u *= c;
  for (int i = 0; i < 3; ++i) u += -kI * sn * a[i] * s[i];
  return u;
}

}  // namespace

SpinDensityField::SpinDensityField(Grid1D grid_y, std::array<std::vector<cplx>, 4> planes, double hbar, double time)
    : grid_y_(grid_y), planes_(std::move(planes)), hbar_(hbar), time_(time) {
  for (const auto& p : planes_)
    if (p.size() != grid_y_.size() * grid_y_.size()) throw GridMismatch("spin density plane does not match grid");
}

DensityField SpinDensityField::block(int a, int b) const {
  return DensityField(grid_y_, planes_[static_cast<std::size_t>(2 * a + b)], hbar_, time_);
}

Eigen::Matrix2cd SpinDensityField::matrix_at(std::size_t ix, std::size_t idx) const {
  const std::size_t k = ix * size() + idx;
  Eigen::Matrix2cd m;
  m << planes_[0][k], planes_[1][k], planes_[2][k], planes_[3][k];
  return m;
}

double SpinDensityField::trace() const {
  const std::size_t n = size();
  double sum = 0.0;
  for (std::size_t ix = 0; ix < n; ++ix) {
    const std::size_t k = ix * n + n / 2;
    sum += planes_[0][k].real() + planes_[3][k].real();
  }
  return sum * grid_y_.spacing();
}

double SpinDensityField::hermiticity_defect() const {
  const std::size_t n = size();
  const std::size_t mid = n / 2;
  double worst = 0.0;
  for (std::size_t ix = 0; ix < n; ++ix) {
    for (std::size_t s = 0; s <= mid; ++s) {
      // s == mid pairs the self-mirrored column 0 with itself
      const std::size_t lo = mid - s;
      const std::size_t hi = s == mid ? 0 : mid + s;
      const Eigen::Matrix2cd a = matrix_at(ix, lo);
      const Eigen::Matrix2cd b = matrix_at(ix, hi);
      worst = std::max(worst, (a - b.adjoint()).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

SpinDensityField make_spin_density(const Amplitude& psi, const std::array<cplx, 2>& chi, double hbar) {
  const double norm = std::sqrt(std::norm(chi[0]) + std::norm(chi[1]));
  if (!(norm > 0.0)) throw InputError("spinor must be non-zero");
  const std::array<cplx, 2> c{chi[0] / norm, chi[1] / norm};
  const auto rho = densify(psi, hbar);
  std::array<std::vector<cplx>, 4> planes;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto& p = planes[static_cast<std::size_t>(2 * a + b)];
      p = rho.values();
      const cplx w = c[a] * std::conj(c[b]);
      for (auto& v : p) v *= w;
    }
  return SpinDensityField(psi.grid(), std::move(planes), hbar, psi.time());
}

MagneticFieldSpec MagneticFieldSpec::uniform(Vec3 h0) {
  MagneticFieldSpec s;
  s.h0 = h0;
  return s;
}

MagneticFieldSpec MagneticFieldSpec::linear_gradient(Vec3 h0, std::array<Vec3, 3> g) {
  MagneticFieldSpec s;
  s.kind = Kind::linear_gradient;
  s.h0 = h0;
  s.gradient = g;
  return s;
}

Vec3 MagneticFieldSpec::at(double x) const {
  Vec3 h = h0;
  if (kind == Kind::linear_gradient)
    for (int i = 0; i < 3; ++i) h[i] += gradient[i][0] * x;
  for (double c : h)
    if (!std::isfinite(c)) throw SpecError("magnetic field is not finite");
  return h;
}

bool MagneticFieldSpec::is_zero() const {
  for (int i = 0; i < 3; ++i) {
    if (h0[i] != 0.0) return false;
    if (kind == Kind::linear_gradient && gradient[i][0] != 0.0) return false;
  }
  return true;
}

SpinAlgebra make_spin_algebra(const PhysicsParams& params) {
  params.validate();
  SpinAlgebra a;
  a.hbar = params.hbar;
  a.gyromagnetic = params.g_factor * params.charge / (2.0 * params.mass * params.light_speed);
  const auto s = pauli();
  for (int i = 0; i < 3; ++i) a.m[i] = a.gyromagnetic * 0.5 * params.hbar * s[i];
  return a;
}

double spin_commutator_check(const SpinAlgebra& algebra, CommutatorForm form) {
  const double c = form == CommutatorForm::as_printed ? 1.0 : algebra.gyromagnetic;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::Matrix2cd d = algebra.m[i] * algebra.m[j] - algebra.m[j] * algebra.m[i];
      for (int k = 0; k < 3; ++k) d -= kI * algebra.hbar * c * static_cast<double>(levi_civita(i, j, k)) * algebra.m[k];
      worst = std::max(worst, d.norm());
    }
  return worst;
}

Vec3 precession_rhs(const Vec3& m, const Vec3& h) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i] += levi_civita(i, j, k) * m[k] * h[j];
  return r;
}

std::vector<Vec3> integrate_precession(const Vec3& m0, const Vec3& h, double t_final, double dt) {
  const std::size_t steps = step_count(0.0, t_final, dt);
  const double step = steps ? t_final / static_cast<double>(steps) : 0.0;
  auto axpy = [](const Vec3& a, double s, const Vec3& b) {
    return Vec3{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  std::vector<Vec3> out{m0};
  Vec3 m = m0;
  for (std::size_t s = 0; s < steps; ++s) {
    const Vec3 k1 = precession_rhs(m, h);
    const Vec3 k2 = precession_rhs(axpy(m, 0.5 * step, k1), h);
    const Vec3 k3 = precession_rhs(axpy(m, 0.5 * step, k2), h);
    const Vec3 k4 = precession_rhs(axpy(m, step, k3), h);
    for (int i = 0; i < 3; ++i) m[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.push_back(m);
  }
  return out;
}

SpinDensityField evolve_pauli(const SpinDensityField& rho, const PotentialSpec& v, const MagneticFieldSpec& h,
                              const PhysicsParams& params, double t_final, double dt) {
  params.validate();
  if (rho.hermiticity_defect() > 1e-9) throw DensityFormatError("spin density is not Hermitian");
  const std::size_t steps = step_count(rho.time(), t_final, dt);
  if (steps == 0) return rho;
  const double tau = (t_final - rho.time()) / static_cast<double>(steps);
  const auto& grid = rho.grid_y();
  const std::size_t n = grid.size();
  if (std::abs(tau) > kinetic_step_bound(grid, params) * (1.0 + 1e-12))
    throw StabilityError("time step exceeds spectral drift bound");
  const double hbar = rho.hbar();

  const bool has_potential = v.kind != PotentialSpec::Kind::free;
  StaggeredPotential pot;
  if (has_potential) pot = sample_potential_staggered(v, grid, params.mass);

  // U(y) on the staggered points x_j + o dx / 2, o in {0, 1}
  const bool magnetic = !h.is_zero();
  const auto algebra = make_spin_algebra(params);
  // m.H tau / hbar = gamma (hbar/2) tau / hbar H.sigma
  const double scale = algebra.gyromagnetic * 0.5 * tau;
  auto rotor = [&](double y) {
    const Vec3 f = h.at(y);
    return su2({scale * f[0], scale * f[1], scale * f[2]});
  };
  std::array<std::vector<Eigen::Matrix2cd>, 2> u;
  if (magnetic)
    for (int o = 0; o < 2; ++o) {
      u[o].resize(n);
      for (std::size_t j = 0; j < n; ++j) u[o][j] = rotor(grid.point(j) + 0.5 * o * grid.spacing());
    }
  auto u_at = [&](std::size_t j, long long offset) -> const Eigen::Matrix2cd& {
    const long long half = offset >= 0 ? offset / 2 : -((-offset + 1) / 2);
    return u[offset % 2 == 0 ? 0 : 1][wrap_index(static_cast<long long>(j) + half, n)];
  };

  auto planes = rho.planes();
  for (std::size_t s = 0; s < steps; ++s) {
    for (auto& p : planes) density_kinetic_step(p, grid, hbar, params.mass, 0.5 * tau);
    if (has_potential)
      for (auto& p : planes) density_potential_step(p, pot, hbar, tau);
    if (magnetic) {
      // left by U(y), right by U(y')^dagger: trace and Hermiticity survive
      parallel_for(n, [&](std::size_t ix) {
        for (std::size_t idx = 0; idx < n; ++idx) {
          const long long off = static_cast<long long>(idx) - static_cast<long long>(n / 2);
          Eigen::Matrix2cd left, right;
          if (idx == 0) {
            // self-mirrored column: y and y' swap under the mirror, so use the mean field on both sides
            const double x = grid.point(ix);
            const Vec3 a = h.at(grid.wrap(x + 0.25 * grid.length()));
            const Vec3 b = h.at(grid.wrap(x - 0.25 * grid.length()));
            left = su2({scale * 0.5 * (a[0] + b[0]), scale * 0.5 * (a[1] + b[1]), scale * 0.5 * (a[2] + b[2])});
            right = left;
          } else {
            left = u_at(ix, off);
            right = u_at(ix, -off);
          }
          const std::size_t k = ix * n + idx;
          Eigen::Matrix2cd m;
          m << planes[0][k], planes[1][k], planes[2][k], planes[3][k];
          m = left * m * right.adjoint();
          planes[0][k] = m(0, 0);
          planes[1][k] = m(0, 1);
          planes[2][k] = m(1, 0);
          planes[3][k] = m(1, 1);
        }
      });
    }
    for (auto& p : planes) density_kinetic_step(p, grid, hbar, params.mass, 0.5 * tau);
  }
  return SpinDensityField(grid, std::move(planes), hbar, t_final);
}

Vec3 spin_expectation(const SpinDensityField& rho, const SpinAlgebra& algebra) {
  const std::size_t n = rho.size();
  Vec3 out{};
  for (int i = 0; i < 3; ++i) {
    cplx s{};
    for (std::size_t ix = 0; ix < n; ++ix) s += (algebra.m[i] * rho.matrix_at(ix, n / 2)).trace();
    out[i] = s.real() * rho.grid_y().spacing();
  }
  return out;
}

}  // namespace wmb
