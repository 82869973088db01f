#pragma once

#include <cstdint>
#include <vector>

#include "wmbridge/fields.hpp"
#include "wmbridge/potential.hpp"

namespace wmb {

struct TrajectoryState {
  double x = 0.0;
  double p = 0.0;
  double t = 0.0;
};

/// Paths sharing one time axis. states[i * n_times + k] is trajectory i at
/// times[k].
struct TrajectoryBundle {
  enum class Kind { newtonian, bohmian };

  Kind kind = Kind::newtonian;
  std::vector<double> times;
  std::vector<TrajectoryState> states;
  /// Per trajectory: 1 if it ever entered a node mask.
  std::vector<std::uint8_t> flagged;
  std::size_t n_trajectories = 0;

  std::size_t n_times() const { return times.size(); }
  const TrajectoryState& at(std::size_t traj, std::size_t k) const { return states[traj * times.size() + k]; }
};

/// Number of equal steps of size <= |dt| covering [t0, t1] (0 when t0 == t1).
std::size_t step_count(double t0, double t1, double dt);

/// Liouville flow of F under H = p^2/2m + V by Strang-split spectral
/// semi-Lagrangian advection: half drift in x, full kick in p, half drift.
/// Each shift must stay under a quarter of its domain per step
/// (StabilityError otherwise); negative overshoot below -1e-6 is an error.
PhaseSpaceField evolve_liouville(const PhaseSpaceField& f, const PotentialSpec& v, const PhysicsParams& params,
                                 double t_final, double dt);

/// One Strang step of evolve_liouville, exposed for operator-splitting
/// drivers. `force` is -dV/dx sampled on the x axis (empty for V == 0).
void liouville_step(std::vector<double>& values, const PhaseSpaceGrid& grid, std::span<const double> force,
                    double mass, double dt);

/// Velocity-Verlet trajectory sampled at every step (closed-form V only).
TrajectoryBundle integrate_newton(double x0, double p0, const PotentialSpec& v, const PhysicsParams& params,
                                  double t_final, double dt);

/// Narrow Gaussian stand-in for delta(x - x0) delta(p - p0).
PhaseSpaceField make_dispersion_free(const TrajectoryState& traj, double sigma_x, double sigma_p,
                                     const PhaseSpaceGrid& grid);
/// Same with the default widths of four grid spacings on each axis.
PhaseSpaceField make_dispersion_free(const TrajectoryState& traj, const PhaseSpaceGrid& grid);

}  // namespace wmb
