#pragma once

#include <vector>

#include "wmbridge/fields.hpp"
#include "wmbridge/potential.hpp"

namespace wmb {

/// Largest stable step for the spectral drift: p_max * dt / m <= L / 4.
double kinetic_step_bound(const Grid1D& grid, const PhysicsParams& params);

/// rho(k, kappa) *= exp(-i hbar k kappa tau / m) on the (x, dx) torus. The
/// x Nyquist row is left untouched (its +k and -k phases average to zero).
void density_kinetic_step(std::vector<cplx>& values, const Grid1D& grid, double hbar, double mass, double tau);

/// rho(x, dx) *= exp(-i [V(x + dx/2) - V(x - dx/2)] tau / hbar), except on
/// the self-mirrored dx = -L/2 column.
void density_potential_step(std::vector<cplx>& values, const StaggeredPotential& v, double hbar, double tau);

/// i hbar d rho/dt = -(hbar^2/2m)(d2/dy2 - d2/dy'2) rho + [V(y) - V(y')] rho,
/// Strang split (half drift, potential phase, half drift).
DensityField evolve_density_first_eq(const DensityField& rho, const PotentialSpec& v, const PhysicsParams& params,
                                     double t_final, double dt);

/// Split-operator propagation of psi under H = P^2/2m + V.
Amplitude evolve_amplitude_second_eq(const Amplitude& psi, const PotentialSpec& v, const PhysicsParams& params,
                                     double t_final, double dt);

/// Snapshots psi(t0 + k * dt * stride) for k = 0..count-1.
std::vector<Amplitude> amplitude_series(const Amplitude& psi, const PotentialSpec& v, const PhysicsParams& params,
                                        double dt, std::size_t stride, std::size_t count);

/// rho(x + dx/2, x - dx/2) = conj(psi(x - dx/2)) psi(x + dx/2). Odd dx
/// offsets fall on half-grid points, sampled by spectral interpolation.
DensityField densify(const Amplitude& psi, double hbar);

/// Phase of psi sampled at the half-shifted points x_j + dx/2.
std::vector<cplx> half_shifted(const Amplitude& psi);

/// R, S and velocity. Points with |psi| <= 1e-6 max|psi| are nodes.
MadelungFields madelung_decompose(const Amplitude& psi, const PhysicsParams& params);

/// Points within `width` grid points of a node (or nodes themselves).
std::vector<std::uint8_t> widen_mask(const std::vector<std::uint8_t>& node_mask, std::size_t width);

struct ResidualReport {
  double l2_residual = 0.0;
  double linf_residual = 0.0;
  std::vector<double> field;
};

enum class Differencing { centered, spectral };

/// dP/dt + d/dx (P S'/m) over interior snapshots; centered differences in
/// t and x. Needs at least 3 uniformly spaced snapshots.
ResidualReport continuity_residual(const std::vector<Amplitude>& series, const PhysicsParams& params);

/// (S')^2/2m + V + dS/dt - (hbar^2/2mR) R'' on unmasked points, with
/// dS/dt = hbar Im(psi_dot / psi).
ResidualReport hamilton_jacobi_residual(const Amplitude& psi, const std::vector<cplx>& psi_dot, const PotentialSpec& v,
                                        const PhysicsParams& params, Differencing scheme = Differencing::spectral);

/// Two-particle density function on (x1, dx1, x2, dx2), one shared axis.
/// values[((i1 * n + m1) * n + i2) * n + m2].
class DensityField2 {
 public:
  static constexpr std::size_t max_points = 64;

  DensityField2(Grid1D grid, std::vector<cplx> values, double hbar, double time = 0.0);

  const Grid1D& grid() const { return grid_; }
  const std::vector<cplx>& values() const { return values_; }
  double hbar() const { return hbar_; }
  double time() const { return time_; }
  std::size_t size() const { return grid_.size(); }
  std::size_t index(std::size_t i1, std::size_t m1, std::size_t i2, std::size_t m2) const {
    const std::size_t n = size();
    return ((i1 * n + m1) * n + i2) * n + m2;
  }
  cplx at(std::size_t i1, std::size_t m1, std::size_t i2, std::size_t m2) const { return values_[index(i1, m1, i2, m2)]; }

  /// P(x1, x2) = rho at dx1 = dx2 = 0, row-major in (x1, x2).
  std::vector<double> diagonal() const;
  double trace() const;
  double hermiticity_defect() const;

 private:
  Grid1D grid_;
  std::vector<cplx> values_;
  double hbar_;
  double time_;
};

/// Product state rho1 (x) rho2.
DensityField2 densify_pair(const Amplitude& psi1, const Amplitude& psi2, double hbar);

/// Two particles of equal mass under V_ext on each and V_int(x1 - x2).
/// Throws MemoryGuardError above 64 points per axis.
DensityField2 evolve_density_two_particle(const DensityField2& rho2, const PotentialSpec& v_ext,
                                          const PotentialSpec& v_int, const PhysicsParams& params, double t_final,
                                          double dt);

}  // namespace wmb
