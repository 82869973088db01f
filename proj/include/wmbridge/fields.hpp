#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wmbridge/grid.hpp"
#include "wmbridge/spectral.hpp"

namespace wmb {

/// Real distribution F(x, p; t) on a phase-space lattice, stored row-major
/// with x as the slow index: values[ix * np + ip].
class PhaseSpaceField {
 public:
  PhaseSpaceField(PhaseSpaceGrid grid, std::vector<double> values, double time = 0.0);

  const PhaseSpaceGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double time() const { return time_; }
  double at(std::size_t ix, std::size_t ip) const { return values_[ix * grid_.np() + ip]; }

  /// Riemann sum of F over the lattice.
  double total() const;
  double min_value() const;

 private:
  PhaseSpaceGrid grid_;
  std::vector<double> values_;
  double time_;
};

/// Density function rho(x + dx/2, x - dx/2) stored in the (x, dx) chart.
/// The dx axis has the same point count and extent as x and is centred on
/// zero, so column n/2 is the diagonal dx = 0. values[ix * n + idx].
class DensityField {
 public:
  DensityField(Grid1D grid_y, std::vector<cplx> values, double hbar, double time = 0.0);

  const Grid1D& grid_y() const { return grid_y_; }
  const Grid1D& grid_dy() const { return grid_dy_; }
  const std::vector<cplx>& values() const { return values_; }
  double hbar() const { return hbar_; }
  double time() const { return time_; }
  std::size_t size() const { return grid_y_.size(); }
  std::size_t diagonal_column() const { return grid_y_.size() / 2; }
  cplx at(std::size_t ix, std::size_t idx) const { return values_[ix * size() + idx]; }

  /// Signed offset of dx column `idx` in units of the grid spacing.
  long long offset(std::size_t idx) const { return static_cast<long long>(idx) - static_cast<long long>(size() / 2); }

  /// Real part of rho(x, x).
  std::vector<double> diagonal() const;
  /// Integral of the diagonal.
  double trace() const;
  /// Largest |rho(x, -dx) - conj(rho(x, dx))| over paired columns, together
  /// with the imaginary parts of the diagonal and of the self-mirrored
  /// column dx = -L/2.
  double hermiticity_defect() const;

 private:
  Grid1D grid_y_;
  Grid1D grid_dy_;
  std::vector<cplx> values_;
  double hbar_;
  double time_;
};

/// Wave function psi(x; t).
class Amplitude {
 public:
  Amplitude(Grid1D grid, std::vector<cplx> values, double time = 0.0);

  const Grid1D& grid() const { return grid_; }
  const std::vector<cplx>& values() const { return values_; }
  double time() const { return time_; }
  std::size_t size() const { return grid_.size(); }

  double norm_squared() const;
  /// Copy scaled to unit norm.
  Amplitude normalized() const;

 private:
  Grid1D grid_;
  std::vector<cplx> values_;
  double time_;
};

/// psi = R exp(i S / hbar) with the derived guidance velocity.
struct MadelungFields {
  std::vector<double> r_field;
  std::vector<double> s_field;
  std::vector<double> velocity;
  /// 1 where |psi| <= node_epsilon (phase undefined), else 0.
  std::vector<std::uint8_t> node_mask;
  double node_epsilon = 0.0;
};

/// Normalised product Gaussian in phase space. Throws GridResolutionError
/// unless sigma_x >= 2 dx and sigma_p >= 2 dp.
PhaseSpaceField make_gaussian_phase_space(const PhaseSpaceGrid& grid, double x0, double p0, double sigma_x,
                                          double sigma_p);

/// Normalised psi ~ exp(-(x-x0)^2/(4 sigma_x^2) + i p0 x / hbar).
Amplitude make_gaussian_amplitude(const Grid1D& grid, double x0, double p0, double sigma_x, double hbar);

/// Minimum-image displacement of `x` from `centre` on a periodic axis.
double periodic_offset(const Grid1D& grid, double x, double centre);

}  // namespace wmb
