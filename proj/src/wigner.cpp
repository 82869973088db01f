#include "wmbridge/wigner.hpp"

#include <cmath>

#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"

namespace wmb {

DensityField wigner_moyal_forward(const PhaseSpaceField& f) {
  const auto& grid = f.grid();
  if (!grid.is_dual()) throw GridResolutionError("phase-space grid is not the dual of its x axis");
  const std::size_t n = grid.nx();
  const double dp = grid.p_axis().spacing();
  std::vector<cplx> out(n * n);
  parallel_for(n, [&](std::size_t ix) {
    std::vector<cplx> row(n);
    for (std::size_t k = 0; k < n; ++k) row[k] = f.at(ix, k) * dp;
    centered_dft(row, std::span<cplx>(out.data() + ix * n, n), +1);
  });
  return DensityField(grid.x_axis(), std::move(out), grid.hbar(), f.time());
}

PhaseSpaceField wigner_inverse(const DensityField& rho) {
  if (rho.hermiticity_defect() > 1e-9) throw DensityFormatError("density is not Hermitian");
  const std::size_t n = rho.size();
  const double hbar = rho.hbar();
  const auto grid = PhaseSpaceGrid::dual(rho.grid_y(), hbar);
  const double scale = rho.grid_dy().spacing() / (2.0 * M_PI * hbar);
  std::vector<double> out(n * n);
  parallel_for(n, [&](std::size_t ix) {
    std::vector<cplx> row(rho.values().begin() + ix * n, rho.values().begin() + (ix + 1) * n);
    std::vector<cplx> spec(n);
    centered_dft(row, spec, -1);
    for (std::size_t k = 0; k < n; ++k) out[ix * n + k] = spec[k].real() * scale;
  });
  return PhaseSpaceField(grid, std::move(out), rho.time());
}

Marginals marginals(const PhaseSpaceField& f) {
  const auto& grid = f.grid();
  const double dx = grid.x_axis().spacing();
  const double dp = grid.p_axis().spacing();
  Marginals m;
  m.fx.assign(grid.nx(), 0.0);
  m.fp.assign(grid.np(), 0.0);
  for (std::size_t ix = 0; ix < grid.nx(); ++ix)
    for (std::size_t ip = 0; ip < grid.np(); ++ip) {
      m.fx[ix] += f.at(ix, ip) * dp;
      m.fp[ip] += f.at(ix, ip) * dx;
    }
  return m;
}

NegativityReport negativity_report(const PhaseSpaceField& f) {
  const auto& grid = f.grid();
  NegativityReport r;
  double neg = 0.0;
  double abs_sum = 0.0;
  r.min_value = f.values().front();
  r.x = grid.x_axis().point(0);
  r.p = grid.p_axis().point(0);
  for (std::size_t ix = 0; ix < grid.nx(); ++ix)
    for (std::size_t ip = 0; ip < grid.np(); ++ip) {
      const double v = f.at(ix, ip);
      if (v < 0.0) neg -= v;
      abs_sum += std::abs(v);
      if (v < r.min_value) {
        r.min_value = v;
        r.x = grid.x_axis().point(ix);
        r.p = grid.p_axis().point(ip);
      }
    }
  r.negative_mass_fraction = abs_sum > 0.0 ? neg / abs_sum : 0.0;
  return r;
}

}  // namespace wmb
