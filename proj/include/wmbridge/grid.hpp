#pragma once

#include <cstddef>
#include <vector>

namespace wmb {

/// Physical constants and per-species parameters. All scenarios run in
/// dimensionless units; `hbar` is the universal action parameter.
struct PhysicsParams {
  double hbar = 1.0;
  double mass = 1.0;
  double charge = 1.0;
  double g_factor = 2.0;
  double light_speed = 1.0;

  /// Throws SpecError unless hbar > 0 and mass > 0.
  void validate() const;
};

/// Uniform periodic axis: points origin + j*spacing, j = 0..n-1.
class Grid1D {
 public:
  Grid1D(std::size_t n_points, double length, double origin);

  /// Axis of `length` centred on zero (origin = -length/2).
  static Grid1D centered(std::size_t n_points, double length);

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double origin() const { return origin_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double point(std::size_t j) const { return origin_ + static_cast<double>(j) * spacing(); }
  std::vector<double> points() const;

  /// Angular wavenumber of FFT bin `q` (standard ordering, Nyquist negative).
  double wavenumber(std::size_t q) const;

  /// Maps an arbitrary coordinate into [origin, origin + length).
  double wrap(double coordinate) const;

  bool operator==(const Grid1D& other) const;
  bool operator!=(const Grid1D& other) const { return !(*this == other); }

 private:
  std::size_t n_;
  double length_;
  double origin_;
};

/// Periodic (x, p) lattice. The momentum axis must satisfy
/// p_max * dx <= pi * hbar so the Fourier bridge to (x, dx) is exact.
class PhaseSpaceGrid {
 public:
  PhaseSpaceGrid(Grid1D x_axis, Grid1D p_axis, double hbar);

  /// Momentum axis dual to `x_axis`: same point count, spacing 2*pi*hbar/L,
  /// centred on zero. p_max * dx == pi * hbar.
  static PhaseSpaceGrid dual(const Grid1D& x_axis, double hbar);

  const Grid1D& x_axis() const { return x_; }
  const Grid1D& p_axis() const { return p_; }
  double hbar() const { return hbar_; }
  std::size_t nx() const { return x_.size(); }
  std::size_t np() const { return p_.size(); }

  /// True when the p axis is exactly the centred dual of the x axis.
  bool is_dual() const;

  bool operator==(const PhaseSpaceGrid& other) const;

 private:
  Grid1D x_;
  Grid1D p_;
  double hbar_;
};

}  // namespace wmb
