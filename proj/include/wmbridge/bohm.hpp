#pragma once

#include <cstdint>
#include <vector>

#include "wmbridge/classical.hpp"
#include "wmbridge/fields.hpp"
#include "wmbridge/potential.hpp"

namespace wmb {

struct EffectivePotentialField {
  std::vector<double> v_classical;
  std::vector<double> q_statistical;
  std::vector<double> v_eff;
  /// Nodes widened by three grid points; Q is set to zero there.
  std::vector<std::uint8_t> node_mask;
};

/// Q = -(hbar^2/2m) R''/R with a spectral R''.
EffectivePotentialField statistical_potential(const Amplitude& psi, const PhysicsParams& params,
                                              const PotentialSpec& v = PotentialSpec::free_particle());

/// Inverse-CDF draws from |psi|^2 (piecewise linear, node mask excluded).
std::vector<double> sample_seeds(const Amplitude& psi, const PhysicsParams& params, std::size_t count,
                                 std::uint64_t rng_seed);

/// Guidance-form integrator fed one snapshot at a time. RK4 in time with
/// the velocity at half steps taken as the mean of the bracketing
/// snapshots, cubic Lagrange interpolation in x.
class BohmIntegrator {
 public:
  /// Throws SeedError if a seed sits in the node mask of `psi0`.
  BohmIntegrator(std::vector<double> seeds, const Amplitude& psi0, const PhysicsParams& params);

  /// Moves every trajectory to the time of `next`. Throws StabilityError
  /// when max|v| dt exceeds the grid spacing.
  void advance(const Amplitude& next);

  const std::vector<double>& positions() const { return x_; }
  /// m v at each current position.
  std::vector<double> momenta() const;
  const std::vector<std::uint8_t>& flagged() const { return flagged_; }
  double time() const { return t_; }

 private:
  struct Snapshot {
    std::vector<double> velocity;
    std::vector<std::uint8_t> mask;
  };
  Snapshot prepare(const Amplitude& psi) const;
  double velocity_at(const Snapshot& s, double x) const;
  bool masked(const Snapshot& s, double x) const;

  PhysicsParams params_;
  Grid1D grid_;
  std::vector<double> x_;
  std::vector<std::uint8_t> flagged_;
  Snapshot current_;
  double t_;
};

/// Trajectories through a uniformly spaced snapshot series, recording every
/// `record_stride`-th snapshot (plus the last).
TrajectoryBundle integrate_bohm(const std::vector<Amplitude>& series, const std::vector<double>& seeds,
                                const PhysicsParams& params, std::size_t record_stride = 1);

/// Pairs (a < b by seed) with x_a > x_b + tolerance at some recorded time.
std::size_t count_crossings(const TrajectoryBundle& bundle, double tolerance);

struct DoubleSlitConfig {
  double separation = 8.0;
  double width = 0.5;
  double momentum = 0.0;
  double screen_time = 5.0;
  double length = 80.0;
  std::size_t points = 1024;
  double dt = 0.005;
  std::size_t n_seeds = 10000;
  std::size_t n_bins = 50;
  std::uint64_t rng_seed = 20240917;
  /// Snapshots kept for output (psi, Q, recorded trajectory times).
  std::size_t n_snapshots = 11;
};

struct ScreenHistogram {
  std::vector<double> bin_center;
  std::vector<double> count;
  std::vector<double> expected;
  double chi2_per_dof = 0.0;
};

struct DoubleSlitResult {
  std::vector<Amplitude> snapshots;
  std::vector<EffectivePotentialField> q_fields;
  TrajectoryBundle trajectories;
  std::vector<double> seeds;
  ScreenHistogram screen;
  double fringe_spacing = 0.0;
  double predicted_spacing = 0.0;
  std::size_t crossings = 0;
  /// Trajectories that changed side of x = 0.
  std::size_t axis_crossings = 0;
};

/// Symmetrised two-Gaussian source at +/- separation/2, free flight to the
/// screen. Throws GridResolutionError when the packets are unresolved or
/// overlap at t = 0.
DoubleSlitResult double_slit_scenario(const DoubleSlitConfig& config, const PhysicsParams& params);

/// Histogram of `positions` over `bins` equal bins spanning the central
/// 99.9% of |psi|^2; chi2 per degree of freedom against the |psi|^2 mass.
ScreenHistogram screen_histogram(const std::vector<double>& positions, const Amplitude& psi, std::size_t bins);

/// Mean distance between adjacent local maxima of |psi|^2 inside the
/// region holding the central `mass` of the probability.
double fringe_spacing(const Amplitude& psi, double mass = 0.9);

}  // namespace wmb
