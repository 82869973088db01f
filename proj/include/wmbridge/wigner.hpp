#pragma once

#include <string>
#include <vector>

#include "wmbridge/fields.hpp"

namespace wmb {

/// rho(x, dx) = sum_p F(x, p) exp(i p dx / hbar) dp along each x row.
/// Requires the dual phase-space grid (GridResolutionError otherwise).
DensityField wigner_moyal_forward(const PhaseSpaceField& f);

/// Label attached to every inverse-transform output.
inline const std::string kInverseLabel = "diagnostic, outside paper formalism";

/// Finite-grid inverse of wigner_moyal_forward:
/// F(x, p) = (1 / 2 pi hbar) sum_dx rho(x, dx) exp(-i p dx / hbar) d(dx).
/// The imaginary residue is discarded; input must be Hermitian within 1e-9
/// (DensityFormatError otherwise).
PhaseSpaceField wigner_inverse(const DensityField& rho);

struct Marginals {
  std::vector<double> fx;
  std::vector<double> fp;
};

/// Riemann sums of F along p (fx) and along x (fp).
Marginals marginals(const PhaseSpaceField& f);

struct NegativityReport {
  double min_value = 0.0;
  /// sum max(-F, 0) / sum |F|
  double negative_mass_fraction = 0.0;
  double x = 0.0;
  double p = 0.0;
};

NegativityReport negativity_report(const PhaseSpaceField& f);

}  // namespace wmb
