#include "wmbridge/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wmbridge/errors.hpp"

namespace wmb {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

MissingQuantity::MissingQuantity(const std::string& quantity, std::vector<std::string> available)
    : Error([&] {
        std::string msg = "quantity '" + quantity + "' not present; available:";
        for (const auto& name : available) msg += " " + name;
        return msg;
      }()),
      available_(std::move(available)) {}

SyntaxError::SyntaxError(const std::string& message, std::size_t position)
    : Error(message + " at column " + std::to_string(position)), position_(position) {}

TruncationError::TruncationError(const std::string& message, std::vector<double> residuals)
    : Error(message), residuals_(std::move(residuals)) {}

SchemaError::SchemaError(const std::string& pointer, const std::string& message)
    : Error(pointer + ": " + message), pointer_(pointer) {}

void PhysicsParams::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw SpecError("hbar must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw SpecError("mass must be positive");
  if (!(light_speed > 0.0)) throw SpecError("light_speed must be positive");
}

Grid1D::Grid1D(std::size_t n_points, double length, double origin)
    : n_(n_points), length_(length), origin_(origin) {
  if (n_ < 8 || !is_power_of_two(n_))
    throw GridResolutionError("grid size must be a power of two >= 8, got " + std::to_string(n_));
  if (!(length_ > 0.0) || !std::isfinite(length_)) throw GridResolutionError("grid length must be positive");
  if (!std::isfinite(origin_)) throw GridResolutionError("grid origin must be finite");
}

Grid1D Grid1D::centered(std::size_t n_points, double length) { return Grid1D(n_points, length, -0.5 * length); }

std::vector<double> Grid1D::points() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = point(j);
  return out;
}

double Grid1D::wavenumber(std::size_t q) const {
  const auto n = static_cast<long long>(n_);
  auto signed_q = static_cast<long long>(q);
  if (signed_q >= n / 2) signed_q -= n;
  return 2.0 * std::numbers::pi * static_cast<double>(signed_q) / length_;
}

double Grid1D::wrap(double coordinate) const {
  double shifted = std::fmod(coordinate - origin_, length_);
  if (shifted < 0.0) shifted += length_;
  return origin_ + shifted;
}

bool Grid1D::operator==(const Grid1D& other) const {
  return n_ == other.n_ && close(length_, other.length_) && close(origin_, other.origin_);
}

PhaseSpaceGrid::PhaseSpaceGrid(Grid1D x_axis, Grid1D p_axis, double hbar)
    : x_(x_axis), p_(p_axis), hbar_(hbar) {
  if (!(hbar_ > 0.0)) throw SpecError("hbar must be positive");
  const double p_max = std::max(std::abs(p_.origin()), std::abs(p_.origin() + p_.length()));
  if (p_max * x_.spacing() > std::numbers::pi * hbar_ * (1.0 + 1e-12))
    throw GridResolutionError("phase-space grid violates p_max*dx <= pi*hbar");
}

PhaseSpaceGrid PhaseSpaceGrid::dual(const Grid1D& x_axis, double hbar) {
  const std::size_t n = x_axis.size();
  const double dp = 2.0 * std::numbers::pi * hbar / x_axis.length();
  return PhaseSpaceGrid(x_axis, Grid1D(n, dp * static_cast<double>(n), -0.5 * dp * static_cast<double>(n)), hbar);
}

bool PhaseSpaceGrid::is_dual() const {
  return p_.size() == x_.size() && close(p_.spacing() * x_.length(), 2.0 * std::numbers::pi * hbar_) &&
         close(p_.origin(), -0.5 * p_.length());
}

bool PhaseSpaceGrid::operator==(const PhaseSpaceGrid& other) const {
  return x_ == other.x_ && p_ == other.p_ && close(hbar_, other.hbar_);
}

}  // namespace wmb
