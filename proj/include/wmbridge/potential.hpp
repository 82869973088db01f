#pragma once

#include <string>
#include <vector>

#include "wmbridge/grid.hpp"

namespace wmb {

/// External potential V(x). Harmonic uses the species mass: V = m w^2 x^2 / 2.
struct PotentialSpec {
  enum class Kind { free, harmonic, linear, quartic, double_gaussian_barrier, tabulated };

  Kind kind = Kind::free;
  double omega = 0.0;         // harmonic
  double force = 0.0;         // linear: V = force * x
  double lambda = 0.0;        // quartic: V = lambda * x^4
  double barrier_height = 0.0;  // double_gaussian_barrier
  double barrier_center = 0.0;  // humps at +/- center
  double barrier_width = 1.0;
  std::vector<double> table;  // tabulated samples on the target grid

  static PotentialSpec free_particle() { return {}; }
  static PotentialSpec harmonic(double omega);
  static PotentialSpec linear(double f0);
  static PotentialSpec quartic(double lambda);
  static PotentialSpec double_gaussian_barrier(double height, double center, double width);
  static PotentialSpec tabulated(std::vector<double> samples);

  /// Largest polynomial degree of V (0 for free); -1 when not polynomial.
  int polynomial_degree() const;
  std::string name() const;

  /// Closed-form value; throws SpecError for tabulated potentials.
  double value(double x, double mass) const;
  /// Closed-form force -dV/dx; throws SpecError for tabulated potentials.
  double force_at(double x, double mass) const;

  bool operator==(const PotentialSpec&) const = default;
};

/// V on the grid points. Throws SpecError on a tabulated length mismatch.
std::vector<double> sample_potential(const PotentialSpec& spec, const Grid1D& grid, double mass);

/// V on the grid points and on the staggered points x_j + dx/2.
struct StaggeredPotential {
  std::vector<double> on_grid;
  std::vector<double> half_shifted;

  /// V(x_j + offset * dx / 2) for integer `offset`, periodic in j.
  double at(std::size_t j, long long offset) const;
};

StaggeredPotential sample_potential_staggered(const PotentialSpec& spec, const Grid1D& grid, double mass);

/// -dV/dx on the grid points.
std::vector<double> sample_force(const PotentialSpec& spec, const Grid1D& grid, double mass);

}  // namespace wmb
