#include "wmbridge/potential.hpp"

#include <cmath>

#include "wmbridge/errors.hpp"
#include "wmbridge/spectral.hpp"

namespace wmb {

PotentialSpec PotentialSpec::harmonic(double omega) {
  PotentialSpec s;
  s.kind = Kind::harmonic;
  s.omega = omega;
  return s;
}

PotentialSpec PotentialSpec::linear(double f0) {
  PotentialSpec s;
  s.kind = Kind::linear;
  s.force = f0;
  return s;
}

PotentialSpec PotentialSpec::quartic(double lambda) {
  PotentialSpec s;
  s.kind = Kind::quartic;
  s.lambda = lambda;
  return s;
}

PotentialSpec PotentialSpec::double_gaussian_barrier(double height, double center, double width) {
  if (!(width > 0.0)) throw SpecError("barrier width must be positive");
  PotentialSpec s;
  s.kind = Kind::double_gaussian_barrier;
  s.barrier_height = height;
  s.barrier_center = center;
  s.barrier_width = width;
  return s;
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> samples) {
  PotentialSpec s;
  s.kind = Kind::tabulated;
  s.table = std::move(samples);
  return s;
}

int PotentialSpec::polynomial_degree() const {
  switch (kind) {
    case Kind::free: return 0;
    case Kind::linear: return 1;
    case Kind::harmonic: return 2;
    case Kind::quartic: return 4;
    default: return -1;
  }
}

std::string PotentialSpec::name() const {
  switch (kind) {
    case Kind::free: return "free";
    case Kind::harmonic: return "harmonic";
    case Kind::linear: return "linear";
    case Kind::quartic: return "quartic";
    case Kind::double_gaussian_barrier: return "double_gaussian_barrier";
    case Kind::tabulated: return "tabulated";
  }
  return "unknown";
}

double PotentialSpec::value(double x, double mass) const {
  switch (kind) {
    case Kind::free: return 0.0;
    case Kind::harmonic: return 0.5 * mass * omega * omega * x * x;
    case Kind::linear: return force * x;
    case Kind::quartic: return lambda * x * x * x * x;
    case Kind::double_gaussian_barrier: {
      const double w2 = 2.0 * barrier_width * barrier_width;
      const double a = x - barrier_center;
      const double b = x + barrier_center;
      return barrier_height * (std::exp(-a * a / w2) + std::exp(-b * b / w2));
    }
    case Kind::tabulated: break;
  }
  throw SpecError("tabulated potential has no closed form");
}

double PotentialSpec::force_at(double x, double mass) const {
  switch (kind) {
    case Kind::free: return 0.0;
    case Kind::harmonic: return -mass * omega * omega * x;
    case Kind::linear: return -force;
    case Kind::quartic: return -4.0 * lambda * x * x * x;
    case Kind::double_gaussian_barrier: {
      const double s2 = barrier_width * barrier_width;
      const double a = x - barrier_center;
      const double b = x + barrier_center;
      return barrier_height * (a / s2 * std::exp(-0.5 * a * a / s2) + b / s2 * std::exp(-0.5 * b * b / s2));
    }
    case Kind::tabulated: break;
  }
  throw SpecError("tabulated potential has no closed form");
}

namespace {

void check_table(const PotentialSpec& spec, const Grid1D& grid) {
  if (spec.table.size() != grid.size())
    throw SpecError("tabulated potential has " + std::to_string(spec.table.size()) + " samples, grid has " +
                    std::to_string(grid.size()));
}

}  // namespace

std::vector<double> sample_potential(const PotentialSpec& spec, const Grid1D& grid, double mass) {
  if (spec.kind == PotentialSpec::Kind::tabulated) {
    check_table(spec, grid);
    return spec.table;
  }
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = spec.value(grid.point(j), mass);
  return out;
}

double StaggeredPotential::at(std::size_t j, long long offset) const {
  const std::size_t n = on_grid.size();
  // floor division keeps odd negative offsets on the correct staggered point
  const long long half = offset >= 0 ? offset / 2 : -((-offset + 1) / 2);
  const std::size_t idx = wrap_index(static_cast<long long>(j) + half, n);
  return (offset % 2 == 0) ? on_grid[idx] : half_shifted[idx];
}

StaggeredPotential sample_potential_staggered(const PotentialSpec& spec, const Grid1D& grid, double mass) {
  StaggeredPotential out;
  out.on_grid = sample_potential(spec, grid, mass);
  if (spec.kind == PotentialSpec::Kind::tabulated) {
    std::vector<cplx> c(out.on_grid.begin(), out.on_grid.end());
    auto shifted = fourier_shift(c, grid, 0.5 * grid.spacing());
    out.half_shifted.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) out.half_shifted[j] = shifted[j].real();
  } else {
    out.half_shifted.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
      out.half_shifted[j] = spec.value(grid.point(j) + 0.5 * grid.spacing(), mass);
  }
  return out;
}

std::vector<double> sample_force(const PotentialSpec& spec, const Grid1D& grid, double mass) {
  if (spec.kind == PotentialSpec::Kind::tabulated) {
    check_table(spec, grid);
    auto d = spectral_derivative(std::span<const double>(spec.table), grid, 1);
    for (auto& v : d) v = -v;
    return d;
  }
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = spec.force_at(grid.point(j), mass);
  return out;
}

}  // namespace wmb
