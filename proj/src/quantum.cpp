#include "wmbridge/quantum.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wmbridge/classical.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"

namespace wmb {

double kinetic_step_bound(const Grid1D& grid, const PhysicsParams& params) {
  const double p_max = M_PI * params.hbar / grid.spacing();
  return 0.25 * grid.length() * params.mass / p_max;
}

namespace {

void check_kinetic_bound(const Grid1D& grid, const PhysicsParams& params, double h) {
  if (std::abs(h) > kinetic_step_bound(grid, params) * (1.0 + 1e-12))
    throw StabilityError("time step " + std::to_string(h) + " exceeds spectral drift bound " +
                         std::to_string(kinetic_step_bound(grid, params)));
}

// +k and -k alias at the Nyquist row; the averaged phase is zero, which keeps
// the step unitary and Hermitian
cplx drift_factor(double k, double shift, bool nyquist) {
  return nyquist ? cplx(1.0, 0.0) : std::polar(1.0, -k * shift);
}

}  // namespace

void density_kinetic_step(std::vector<cplx>& values, const Grid1D& grid, double hbar, double mass, double tau) {
  const std::size_t n = grid.size();
  const std::array<std::size_t, 2> shape{n, n};
  fft_axis(values, shape, 0, FftDirection::forward);
  fft_axis(values, shape, 1, FftDirection::forward);
  const double inv = 1.0 / static_cast<double>(n * n);
  for (std::size_t qx = 0; qx < n; ++qx) {
    const double k = grid.wavenumber(qx);
    for (std::size_t qd = 0; qd < n; ++qd) {
      // kappa = p / hbar of the matching momentum column
      const double shift = hbar * grid.wavenumber(qd) * tau / mass;
      values[qx * n + qd] *= drift_factor(k, shift, qx == n / 2) * inv;
    }
  }
  fft_axis(values, shape, 0, FftDirection::backward);
  fft_axis(values, shape, 1, FftDirection::backward);
}

void density_potential_step(std::vector<cplx>& values, const StaggeredPotential& v, double hbar, double tau) {
  const std::size_t n = v.on_grid.size();
  parallel_for(n, [&](std::size_t ix) {
    for (std::size_t idx = 0; idx < n; ++idx) {
      const long long m = static_cast<long long>(idx) - static_cast<long long>(n / 2);
      const double dv = v.at(ix, m) - v.at(ix, -m);
      // dx = -L/2 and +L/2 share the -n/2 column; their phases average to zero
      if (idx != 0) values[ix * n + idx] *= std::polar(1.0, -dv * tau / hbar);
    }
  });
}

DensityField evolve_density_first_eq(const DensityField& rho, const PotentialSpec& v, const PhysicsParams& params,
                                     double t_final, double dt) {
  params.validate();
  if (rho.hermiticity_defect() > 1e-9) throw DensityFormatError("density is not Hermitian");
  const std::size_t steps = step_count(rho.time(), t_final, dt);
  if (steps == 0) return rho;
  const double h = (t_final - rho.time()) / static_cast<double>(steps);
  const auto& grid = rho.grid_y();
  check_kinetic_bound(grid, params, h);

  const bool has_potential = v.kind != PotentialSpec::Kind::free;
  StaggeredPotential pot;
  if (has_potential) pot = sample_potential_staggered(v, grid, params.mass);

  std::vector<cplx> values = rho.values();
  const double hbar = rho.hbar();
  for (std::size_t s = 0; s < steps; ++s) {
    density_kinetic_step(values, grid, hbar, params.mass, 0.5 * h);
    if (has_potential) density_potential_step(values, pot, hbar, h);
    density_kinetic_step(values, grid, hbar, params.mass, 0.5 * h);
  }
  return DensityField(grid, std::move(values), hbar, t_final);
}

namespace {

struct AmplitudePropagator {
  std::vector<cplx> half_kinetic;
  std::vector<cplx> potential_phase;
  bool has_potential = false;

  AmplitudePropagator(const Grid1D& grid, const PotentialSpec& v, const PhysicsParams& params, double h) {
    const std::size_t n = grid.size();
    half_kinetic.resize(n);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t q = 0; q < n; ++q) {
      const double k = grid.wavenumber(q);
      half_kinetic[q] = std::polar(inv, -params.hbar * k * k * 0.5 * h / (2.0 * params.mass));
    }
    has_potential = v.kind != PotentialSpec::Kind::free;
    if (has_potential) {
      const auto vx = sample_potential(v, grid, params.mass);
      potential_phase.resize(n);
      for (std::size_t j = 0; j < n; ++j) potential_phase[j] = std::polar(1.0, -vx[j] * h / params.hbar);
    }
  }

  void kinetic(std::vector<cplx>& psi) const {
    fft(psi, FftDirection::forward);
    for (std::size_t q = 0; q < psi.size(); ++q) psi[q] *= half_kinetic[q];
    fft(psi, FftDirection::backward);
  }

  void step(std::vector<cplx>& psi) const {
    kinetic(psi);
    if (has_potential)
      for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= potential_phase[j];
    kinetic(psi);
  }
};

}  // namespace

Amplitude evolve_amplitude_second_eq(const Amplitude& psi, const PotentialSpec& v, const PhysicsParams& params,
                                     double t_final, double dt) {
  params.validate();
  const std::size_t steps = step_count(psi.time(), t_final, dt);
  if (steps == 0) return psi;
  const double h = (t_final - psi.time()) / static_cast<double>(steps);
  check_kinetic_bound(psi.grid(), params, h);
  AmplitudePropagator prop(psi.grid(), v, params, h);
  std::vector<cplx> values = psi.values();
  for (std::size_t s = 0; s < steps; ++s) prop.step(values);
  return Amplitude(psi.grid(), std::move(values), t_final);
}

std::vector<Amplitude> amplitude_series(const Amplitude& psi, const PotentialSpec& v, const PhysicsParams& params,
                                        double dt, std::size_t stride, std::size_t count) {
  params.validate();
  if (stride == 0) throw InputError("snapshot stride must be positive");
  check_kinetic_bound(psi.grid(), params, dt);
  AmplitudePropagator prop(psi.grid(), v, params, dt);
  std::vector<Amplitude> out;
  out.reserve(count);
  std::vector<cplx> values = psi.values();
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0)
      for (std::size_t s = 0; s < stride; ++s) prop.step(values);
    out.emplace_back(psi.grid(), values, psi.time() + dt * static_cast<double>(k * stride));
  }
  return out;
}

std::vector<cplx> half_shifted(const Amplitude& psi) {
  return fourier_shift(psi.values(), psi.grid(), 0.5 * psi.grid().spacing());
}

DensityField densify(const Amplitude& psi, double hbar) {
  const std::size_t n = psi.size();
  const auto& v = psi.values();
  const auto half = half_shifted(psi);
  std::vector<cplx> out(n * n);
  const auto ln = static_cast<long long>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<long long>(j);
    for (std::size_t idx = 0; idx < n; ++idx) {
      const long long m = static_cast<long long>(idx) - ln / 2;
      cplx value;
      if (m % 2 == 0) {
        const long long q = m / 2;
        value = std::conj(v[wrap_index(jj - q, n)]) * v[wrap_index(jj + q, n)];
      } else {
        // m = 2q + 1, floor division
        const long long q = m >= 0 ? (m - 1) / 2 : -((-m + 1) / 2);
        value = std::conj(half[wrap_index(jj - q - 1, n)]) * half[wrap_index(jj + q, n)];
      }
      // the -n/2 column stands for both dx = -L/2 and dx = +L/2; store their average
      out[j * n + idx] = idx == 0 ? cplx(value.real(), 0.0) : value;
    }
  }
  return DensityField(psi.grid(), std::move(out), hbar, psi.time());
}

MadelungFields madelung_decompose(const Amplitude& psi, const PhysicsParams& params) {
  const std::size_t n = psi.size();
  const auto& v = psi.values();
  MadelungFields out;
  out.r_field.resize(n);
  out.s_field.assign(n, 0.0);
  out.velocity.assign(n, 0.0);
  out.node_mask.assign(n, 0);
  double r_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.r_field[j] = std::abs(v[j]);
    r_max = std::max(r_max, out.r_field[j]);
  }
  out.node_epsilon = 1e-6 * r_max;
  for (std::size_t j = 0; j < n; ++j) out.node_mask[j] = out.r_field[j] <= out.node_epsilon ? 1 : 0;

  std::vector<double> re(n);
  std::vector<double> im(n);
  for (std::size_t j = 0; j < n; ++j) {
    re[j] = v[j].real();
    im[j] = v[j].imag();
  }
  const auto dre = spectral_derivative(std::span<const double>(re), psi.grid(), 1);
  const auto dim = spectral_derivative(std::span<const double>(im), psi.grid(), 1);
  for (std::size_t j = 0; j < n; ++j)
    if (!out.node_mask[j])
      out.velocity[j] = params.hbar / params.mass * (re[j] * dim[j] - im[j] * dre[j]) / std::norm(v[j]);

  // cell-wise phase increments, bridged across masked gaps
  out.s_field[0] = params.hbar * std::arg(v[0]);
  long long last = out.node_mask[0] ? -1 : 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (out.node_mask[j]) {
      out.s_field[j] = last >= 0 ? out.s_field[static_cast<std::size_t>(last)] : out.s_field[0];
      continue;
    }
    if (last < 0)
      out.s_field[j] = params.hbar * std::arg(v[j]);
    else
      out.s_field[j] = out.s_field[static_cast<std::size_t>(last)] +
                       params.hbar * std::arg(v[j] * std::conj(v[static_cast<std::size_t>(last)]));
    last = static_cast<long long>(j);
  }
  return out;
}

std::vector<std::uint8_t> widen_mask(const std::vector<std::uint8_t>& node_mask, std::size_t width) {
  const std::size_t n = node_mask.size();
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!node_mask[j]) continue;
    for (long long s = -static_cast<long long>(width); s <= static_cast<long long>(width); ++s)
      out[wrap_index(static_cast<long long>(j) + s, n)] = 1;
  }
  return out;
}

namespace {

constexpr std::size_t kMaskWidth = 3;

std::vector<cplx> centered_first(const std::vector<cplx>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = (f[(j + 1) % n] - f[(j + n - 1) % n]) / (2.0 * dx);
  return out;
}

std::vector<double> centered_first(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = (f[(j + 1) % n] - f[(j + n - 1) % n]) / (2.0 * dx);
  return out;
}

void finish(ResidualReport& r, double dx, std::size_t samples) {
  double sum = 0.0;
  for (double v : r.field) {
    sum += v * v;
    r.linf_residual = std::max(r.linf_residual, std::abs(v));
  }
  r.l2_residual = samples == 0 ? 0.0 : std::sqrt(sum * dx / static_cast<double>(samples));
}

}  // namespace

ResidualReport continuity_residual(const std::vector<Amplitude>& series, const PhysicsParams& params) {
  params.validate();
  if (series.size() < 3) throw InputError("continuity residual needs at least 3 snapshots");
  const auto& grid = series.front().grid();
  const std::size_t n = grid.size();
  for (const auto& s : series)
    if (s.grid() != grid) throw InputError("snapshot grids differ");
  const double dt = series[1].time() - series[0].time();
  if (!(std::abs(dt) > 0.0)) throw InputError("snapshot times must increase");
  for (std::size_t k = 2; k < series.size(); ++k)
    if (std::abs(series[k].time() - series[k - 1].time() - dt) > 1e-9 * std::abs(dt) + 1e-14)
      throw InputError("snapshot times are not uniformly spaced");
  const double dx = grid.spacing();

  ResidualReport r;
  r.field.assign(n, 0.0);
  std::size_t samples = 0;
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < series.size(); ++k) {
    const auto& psi = series[k].values();
    const auto fields = madelung_decompose(series[k], params);
    const auto mask = widen_mask(fields.node_mask, kMaskWidth);
    const auto dpsi = centered_first(psi, dx);
    std::vector<double> current(n);
    for (std::size_t j = 0; j < n; ++j)
      current[j] = params.hbar / params.mass * (std::conj(psi[j]) * dpsi[j]).imag();
    const auto dj = centered_first(current, dx);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[j]) continue;
      const double dp = (std::norm(series[k + 1].values()[j]) - std::norm(series[k - 1].values()[j])) / (2.0 * dt);
      const double res = dp + dj[j];
      sum += res * res;
      r.linf_residual = std::max(r.linf_residual, std::abs(res));
      if (k == series.size() / 2) r.field[j] = res;
    }
    ++samples;
  }
  r.l2_residual = std::sqrt(sum * dx / static_cast<double>(samples));
  return r;
}

ResidualReport hamilton_jacobi_residual(const Amplitude& psi, const std::vector<cplx>& psi_dot, const PotentialSpec& v,
                                        const PhysicsParams& params, Differencing scheme) {
  params.validate();
  const std::size_t n = psi.size();
  if (psi_dot.size() != n) throw InputError("psi_dot does not match the amplitude grid");
  const auto& grid = psi.grid();
  const double dx = grid.spacing();
  const auto& values = psi.values();
  const auto fields = madelung_decompose(psi, params);
  const auto mask = widen_mask(fields.node_mask, kMaskWidth);
  const auto vx = sample_potential(v, grid, params.mass);
  const double hbar = params.hbar;
  const double m = params.mass;

  std::vector<double> ds(n);
  std::vector<double> r2(n);
  if (scheme == Differencing::spectral) {
    for (std::size_t j = 0; j < n; ++j) ds[j] = m * fields.velocity[j];
    r2 = spectral_derivative(std::span<const double>(fields.r_field), grid, 2);
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& a = values[(j + 1) % n];
      const auto& b = values[(j + n - 1) % n];
      ds[j] = hbar * std::arg(a * std::conj(b)) / (2.0 * dx);
      const auto& r = fields.r_field;
      r2[j] = (r[(j + 1) % n] - 2.0 * r[j] + r[(j + n - 1) % n]) / (dx * dx);
    }
  }

  ResidualReport out;
  out.field.assign(n, 0.0);
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (mask[j]) continue;
    const double st = hbar * (psi_dot[j] / values[j]).imag();
    const double q = -hbar * hbar / (2.0 * m) * r2[j] / fields.r_field[j];
    out.field[j] = ds[j] * ds[j] / (2.0 * m) + vx[j] + st + q;
    ++count;
  }
  finish(out, dx, count > 0 ? 1 : 0);
  return out;
}

DensityField2::DensityField2(Grid1D grid, std::vector<cplx> values, double hbar, double time)
    : grid_(grid), values_(std::move(values)), hbar_(hbar), time_(time) {
  const std::size_t n = grid_.size();
  if (n > max_points)
    throw MemoryGuardError("two-particle grid has " + std::to_string(n) + " points per axis, limit is " +
                           std::to_string(max_points));
  if (values_.size() != n * n * n * n) throw GridMismatch("two-particle values do not match grid");
}

std::vector<double> DensityField2::diagonal() const {
  const std::size_t n = size();
  std::vector<double> out(n * n);
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2) out[i1 * n + i2] = at(i1, n / 2, i2, n / 2).real();
  return out;
}

double DensityField2::trace() const {
  double sum = 0.0;
  for (double v : diagonal()) sum += v;
  return sum * grid_.spacing() * grid_.spacing();
}

double DensityField2::hermiticity_defect() const {
  const std::size_t n = size();
  double worst = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t m1 = 0; m1 < n; ++m1)
      for (std::size_t i2 = 0; i2 < n; ++i2)
        for (std::size_t m2 = 0; m2 < n; ++m2) {
          const cplx a = at(i1, m1, i2, m2);
          const cplx b = at(i1, (n - m1) % n, i2, (n - m2) % n);
          worst = std::max(worst, std::abs(a - std::conj(b)));
        }
  return worst;
}

DensityField2 densify_pair(const Amplitude& psi1, const Amplitude& psi2, double hbar) {
  if (psi1.grid() != psi2.grid()) throw GridMismatch("pair amplitudes live on different grids");
  const std::size_t n = psi1.size();
  if (n > DensityField2::max_points) throw MemoryGuardError("two-particle grid above 64 points per axis");
  const auto r1 = densify(psi1, hbar);
  const auto r2 = densify(psi2, hbar);
  std::vector<cplx> out(n * n * n * n);
  for (std::size_t a = 0; a < n * n; ++a)
    for (std::size_t b = 0; b < n * n; ++b) out[a * n * n + b] = r1.values()[a] * r2.values()[b];
  return DensityField2(psi1.grid(), std::move(out), hbar, psi1.time());
}

namespace {

void pair_kinetic_step(std::vector<cplx>& values, const Grid1D& grid, double hbar, double mass, double tau) {
  const std::size_t n = grid.size();
  const std::array<std::size_t, 4> shape{n, n, n, n};
  for (std::size_t ax = 0; ax < 4; ++ax) fft_axis(values, shape, ax, FftDirection::forward);
  const double inv = 1.0 / static_cast<double>(n * n * n * n);
  std::vector<cplx> f(n * n);
  for (std::size_t qx = 0; qx < n; ++qx)
    for (std::size_t qd = 0; qd < n; ++qd)
      f[qx * n + qd] = drift_factor(grid.wavenumber(qx), hbar * grid.wavenumber(qd) * tau / mass, qx == n / 2);
  for (std::size_t a = 0; a < n * n; ++a)
    for (std::size_t b = 0; b < n * n; ++b) values[a * n * n + b] *= f[a] * f[b] * inv;
  for (std::size_t ax = 0; ax < 4; ++ax) fft_axis(values, shape, ax, FftDirection::backward);
}

}  // namespace

DensityField2 evolve_density_two_particle(const DensityField2& rho2, const PotentialSpec& v_ext,
                                          const PotentialSpec& v_int, const PhysicsParams& params, double t_final,
                                          double dt) {
  params.validate();
  if (rho2.hermiticity_defect() > 1e-9) throw DensityFormatError("two-particle density is not Hermitian");
  if (v_int.kind == PotentialSpec::Kind::tabulated) throw SpecError("pair potential must have a closed form");
  const std::size_t steps = step_count(rho2.time(), t_final, dt);
  if (steps == 0) return rho2;
  const double h = (t_final - rho2.time()) / static_cast<double>(steps);
  const auto& grid = rho2.grid();
  check_kinetic_bound(grid, params, h);
  const std::size_t n = grid.size();
  const auto ln = static_cast<long long>(n);
  const double hbar = rho2.hbar();

  const auto ext = sample_potential_staggered(v_ext, grid, params.mass);
  // pair potential at separations u * dx / 2, minimum image
  std::vector<double> pair(6 * n + 1);
  for (long long u = -3 * ln; u <= 3 * ln; ++u) {
    const double d = periodic_offset(grid, 0.5 * static_cast<double>(u) * grid.spacing(), 0.0);
    pair[static_cast<std::size_t>(u + 3 * ln)] = v_int.value(d, params.mass);
  }
  auto vpair = [&](long long u) { return pair[static_cast<std::size_t>(u + 3 * ln)]; };

  std::vector<cplx> phase(n * n * n * n);
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t m1 = 0; m1 < n; ++m1) {
      const long long o1 = static_cast<long long>(m1) - ln / 2;
      const double d1 = ext.at(i1, o1) - ext.at(i1, -o1);
      for (std::size_t i2 = 0; i2 < n; ++i2)
        for (std::size_t m2 = 0; m2 < n; ++m2) {
          const long long o2 = static_cast<long long>(m2) - ln / 2;
          const double d2 = ext.at(i2, o2) - ext.at(i2, -o2);
          const long long base = 2 * (static_cast<long long>(i1) - static_cast<long long>(i2));
          const double dint = vpair(base + o1 - o2) - vpair(base - o1 + o2);
          phase[rho2.index(i1, m1, i2, m2)] = cplx(-(d1 + d2 + dint) * h / hbar, 0.0);
        }
    }
  // where an offset sits on the self-mirrored -n/2 column, average the phase
  // with its mirror entry so that g(-dx1, -dx2) = conj g(dx1, dx2)
  auto mirror = [n](std::size_t m) { return (n - m) % n; };
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      for (std::size_t m1 = 0; m1 < n; ++m1)
        for (std::size_t m2 = 0; m2 < n; ++m2) {
          if (m1 != 0 && m2 != 0) continue;
          const std::size_t a = rho2.index(i1, m1, i2, m2);
          const std::size_t b = rho2.index(i1, mirror(m1), i2, mirror(m2));
          if (b < a) continue;
          const double avg = 0.5 * (phase[a].real() - phase[b].real());
          phase[a] = cplx(avg, 0.0);
          phase[b] = cplx(-avg, 0.0);
        }
  for (auto& ph : phase) ph = std::polar(1.0, ph.real());

  std::vector<cplx> values = rho2.values();
  for (std::size_t s = 0; s < steps; ++s) {
    pair_kinetic_step(values, grid, hbar, params.mass, 0.5 * h);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= phase[i];
    pair_kinetic_step(values, grid, hbar, params.mass, 0.5 * h);
  }
  return DensityField2(grid, std::move(values), hbar, t_final);
}

}  // namespace wmb
