#include "wmbridge/classical.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wmbridge/errors.hpp"

namespace wmb {

std::size_t step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("time step must be positive");
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

namespace {

cplx shift_factor(double k, double shift, bool nyquist) {
  return nyquist ? cplx(std::cos(k * shift), 0.0) : std::polar(1.0, -k * shift);
}

// F(x, p) -> F(x - p*tau/m, p)
void drift(std::vector<cplx>& work, const PhaseSpaceGrid& grid, double mass, double tau) {
  const std::size_t nx = grid.nx();
  const std::size_t np = grid.np();
  const std::array<std::size_t, 2> shape{nx, np};
  fft_axis(work, shape, 0, FftDirection::forward);
  const double inv_n = 1.0 / static_cast<double>(nx);
  for (std::size_t q = 0; q < nx; ++q) {
    const double k = grid.x_axis().wavenumber(q);
    for (std::size_t ip = 0; ip < np; ++ip) {
      const double shift = grid.p_axis().point(ip) * tau / mass;
      work[q * np + ip] *= shift_factor(k, shift, q == nx / 2) * inv_n;
    }
  }
  fft_axis(work, shape, 0, FftDirection::backward);
}

// F(x, p) -> F(x, p - f(x)*tau)
void kick(std::vector<cplx>& work, const PhaseSpaceGrid& grid, std::span<const double> force, double tau) {
  const std::size_t nx = grid.nx();
  const std::size_t np = grid.np();
  const std::array<std::size_t, 2> shape{nx, np};
  fft_axis(work, shape, 1, FftDirection::forward);
  const double inv_n = 1.0 / static_cast<double>(np);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double shift = force[ix] * tau;
    for (std::size_t q = 0; q < np; ++q)
      work[ix * np + q] *= shift_factor(grid.p_axis().wavenumber(q), shift, q == np / 2) * inv_n;
  }
  fft_axis(work, shape, 1, FftDirection::backward);
}

void take_real(const std::vector<cplx>& work, std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = work[i].real();
}

}  // namespace

void liouville_step(std::vector<double>& values, const PhaseSpaceGrid& grid, std::span<const double> force,
                    double mass, double dt) {
  std::vector<cplx> work(values.begin(), values.end());
  drift(work, grid, mass, 0.5 * dt);
  if (!force.empty()) {
    take_real(work, values);
    work.assign(values.begin(), values.end());
    kick(work, grid, force, dt);
  }
  take_real(work, values);
  work.assign(values.begin(), values.end());
  drift(work, grid, mass, 0.5 * dt);
  take_real(work, values);
}

PhaseSpaceField evolve_liouville(const PhaseSpaceField& f, const PotentialSpec& v, const PhysicsParams& params,
                                 double t_final, double dt) {
  params.validate();
  const auto& grid = f.grid();
  const std::size_t steps = step_count(f.time(), t_final, dt);
  if (steps == 0) return f;
  const double h = (t_final - f.time()) / static_cast<double>(steps);

  std::vector<double> force;
  if (v.kind != PotentialSpec::Kind::free) force = sample_force(v, grid.x_axis(), params.mass);

  const double p_max = std::max(std::abs(grid.p_axis().origin()),
                                std::abs(grid.p_axis().origin() + grid.p_axis().length()));
  if (p_max * std::abs(h) / params.mass > 0.25 * grid.x_axis().length())
    throw StabilityError("drift per step exceeds a quarter of the x domain");
  double f_max = 0.0;
  for (double fx : force) f_max = std::max(f_max, std::abs(fx));
  if (f_max * std::abs(h) > 0.25 * grid.p_axis().length())
    throw StabilityError("kick per step exceeds a quarter of the p domain");

  std::vector<double> values = f.values();
  for (std::size_t s = 0; s < steps; ++s) liouville_step(values, grid, force, params.mass, h);

  const double lowest = *std::min_element(values.begin(), values.end());
  if (lowest < -1e-6) throw StabilityError("negative overshoot " + std::to_string(lowest) + " after advection");
  return PhaseSpaceField(grid, std::move(values), t_final);
}

TrajectoryBundle integrate_newton(double x0, double p0, const PotentialSpec& v, const PhysicsParams& params,
                                  double t_final, double dt) {
  params.validate();
  const std::size_t steps = step_count(0.0, t_final, dt);
  const double h = steps == 0 ? 0.0 : t_final / static_cast<double>(steps);
  const double m = params.mass;

  TrajectoryBundle out;
  out.kind = TrajectoryBundle::Kind::newtonian;
  out.n_trajectories = 1;
  out.flagged.assign(1, 0);
  out.times.reserve(steps + 1);
  out.states.reserve(steps + 1);

  double x = x0;
  double p = p0;
  double fx = v.force_at(x, m);
  out.times.push_back(0.0);
  out.states.push_back({x, p, 0.0});
  for (std::size_t s = 1; s <= steps; ++s) {
    const double p_half = p + 0.5 * h * fx;
    x += h * p_half / m;
    fx = v.force_at(x, m);
    p = p_half + 0.5 * h * fx;
    if (!std::isfinite(x) || !std::isfinite(p)) throw StabilityError("non-finite Newtonian trajectory");
    const double t = h * static_cast<double>(s);
    out.times.push_back(t);
    out.states.push_back({x, p, t});
  }
  return out;
}

PhaseSpaceField make_dispersion_free(const TrajectoryState& traj, double sigma_x, double sigma_p,
                                     const PhaseSpaceGrid& grid) {
  auto f = make_gaussian_phase_space(grid, traj.x, traj.p, sigma_x, sigma_p);
  return PhaseSpaceField(grid, f.values(), traj.t);
}

PhaseSpaceField make_dispersion_free(const TrajectoryState& traj, const PhaseSpaceGrid& grid) {
  return make_dispersion_free(traj, 4.0 * grid.x_axis().spacing(), 4.0 * grid.p_axis().spacing(), grid);
}

}  // namespace wmb
