#include "wmbridge/fields.hpp"

#include <algorithm>
#include <cmath>

#include "wmbridge/errors.hpp"

namespace wmb {

PhaseSpaceField::PhaseSpaceField(PhaseSpaceGrid grid, std::vector<double> values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.nx() * grid_.np()) throw GridMismatch("phase-space values do not match grid");
}

double PhaseSpaceField::total() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * grid_.x_axis().spacing() * grid_.p_axis().spacing();
}

double PhaseSpaceField::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

DensityField::DensityField(Grid1D grid_y, std::vector<cplx> values, double hbar, double time)
    : grid_y_(grid_y),
      grid_dy_(Grid1D::centered(grid_y.size(), grid_y.length())),
      values_(std::move(values)),
      hbar_(hbar),
      time_(time) {
  if (values_.size() != grid_y_.size() * grid_y_.size()) throw GridMismatch("density values do not match grid");
}

std::vector<double> DensityField::diagonal() const {
  const std::size_t n = size();
  std::vector<double> out(n);
  for (std::size_t ix = 0; ix < n; ++ix) out[ix] = at(ix, diagonal_column()).real();
  return out;
}

double DensityField::trace() const {
  double sum = 0.0;
  for (double v : diagonal()) sum += v;
  return sum * grid_y_.spacing();
}

double DensityField::hermiticity_defect() const {
  const std::size_t n = size();
  const std::size_t mid = diagonal_column();
  double worst = 0.0;
  for (std::size_t ix = 0; ix < n; ++ix) {
    worst = std::max(worst, std::abs(at(ix, mid).imag()));
    worst = std::max(worst, std::abs(at(ix, 0).imag()));
    for (std::size_t s = 1; s < mid; ++s) worst = std::max(worst, std::abs(at(ix, mid - s) - std::conj(at(ix, mid + s))));
  }
  return worst;
}

Amplitude::Amplitude(Grid1D grid, std::vector<cplx> values, double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size()) throw GridMismatch("amplitude values do not match grid");
}

double Amplitude::norm_squared() const {
  double sum = 0.0;
  for (const auto& v : values_) sum += std::norm(v);
  return sum * grid_.spacing();
}

Amplitude Amplitude::normalized() const {
  const double norm = std::sqrt(norm_squared());
  if (!(norm > 0.0)) throw InputError("cannot normalise a zero amplitude");
  std::vector<cplx> out(values_);
  for (auto& v : out) v /= norm;
  return Amplitude(grid_, std::move(out), time_);
}

double periodic_offset(const Grid1D& grid, double x, double centre) {
  const double length = grid.length();
  double d = std::fmod(x - centre + 0.5 * length, length);
  if (d < 0.0) d += length;
  return d - 0.5 * length;
}

PhaseSpaceField make_gaussian_phase_space(const PhaseSpaceGrid& grid, double x0, double p0, double sigma_x,
                                          double sigma_p) {
  const auto& xa = grid.x_axis();
  const auto& pa = grid.p_axis();
  if (!(sigma_x >= 2.0 * xa.spacing() * (1.0 - 1e-12)))
    throw GridResolutionError("sigma_x below two grid spacings");
  if (!(sigma_p >= 2.0 * pa.spacing() * (1.0 - 1e-12)))
    throw GridResolutionError("sigma_p below two grid spacings");

  std::vector<double> gx(grid.nx());
  std::vector<double> gp(grid.np());
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double d = periodic_offset(xa, xa.point(i), x0);
    gx[i] = std::exp(-0.5 * d * d / (sigma_x * sigma_x));
  }
  for (std::size_t k = 0; k < gp.size(); ++k) {
    const double d = periodic_offset(pa, pa.point(k), p0);
    gp[k] = std::exp(-0.5 * d * d / (sigma_p * sigma_p));
  }
  double sx = 0.0;
  double sp = 0.0;
  for (double v : gx) sx += v;
  for (double v : gp) sp += v;
  const double scale = 1.0 / (sx * xa.spacing() * sp * pa.spacing());

  std::vector<double> values(grid.nx() * grid.np());
  for (std::size_t i = 0; i < gx.size(); ++i)
    for (std::size_t k = 0; k < gp.size(); ++k) values[i * gp.size() + k] = gx[i] * gp[k] * scale;
  return PhaseSpaceField(grid, std::move(values));
}

Amplitude make_gaussian_amplitude(const Grid1D& grid, double x0, double p0, double sigma_x, double hbar) {
  if (!(sigma_x >= 2.0 * grid.spacing() * (1.0 - 1e-12))) throw GridResolutionError("sigma_x below two grid spacings");
  if (!(hbar > 0.0)) throw SpecError("hbar must be positive");
  std::vector<cplx> values(grid.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double x = grid.point(j);
    const double d = periodic_offset(grid, x, x0);
    values[j] = std::polar(std::exp(-d * d / (4.0 * sigma_x * sigma_x)), p0 * x / hbar);
  }
  return Amplitude(grid, std::move(values)).normalized();
}

}  // namespace wmb
