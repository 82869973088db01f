#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "wmbridge/fields.hpp"

namespace wmb {

using Powers = std::array<int, 3>;

/// Per-variable power limit of the observable grammar.
inline constexpr int kMaxPower = 8;

struct Monomial {
  cplx coeff;
  Powers x_pow{};
  Powers p_pow{};
};

/// Phase-space polynomial in commuting variables x1..x3, p1..p3. Terms are
/// sorted by (x powers, p powers) with duplicates merged and zeros dropped.
class ObservableExpr {
 public:
  ObservableExpr() = default;
  explicit ObservableExpr(std::vector<Monomial> terms);

  static ObservableExpr constant(cplx c);
  static ObservableExpr x(int axis = 0);
  static ObservableExpr p(int axis = 0);

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// True when only axis 0 appears.
  bool is_one_dimensional() const;

  ObservableExpr operator+(const ObservableExpr& o) const;
  ObservableExpr operator-(const ObservableExpr& o) const;
  ObservableExpr operator*(const ObservableExpr& o) const;
  ObservableExpr scaled(cplx c) const;
  /// Throws UnsupportedPower above kMaxPower.
  ObservableExpr pow(int exponent) const;

  std::string to_string() const;

 private:
  void canonicalize();
  std::vector<Monomial> terms_;
};

/// Grammar: signed terms, numbers, x, p, x1..x3, p1..p3, L1..L3 (angular
/// momentum eps_ijk x_j p_k), `*`, `^` with integer exponents, parentheses.
/// Whitespace is ignored. Errors carry the 1-based column.
ObservableExpr parse_observable(const std::string& text);

/// coeff * x^a * (-i hbar d/d(dx))^b acting on a DensityField.
struct DensityTerm {
  cplx coeff;
  int x_pow = 0;
  int ddx_pow = 0;
};

struct DensityOperator {
  std::vector<DensityTerm> terms;
  double hbar = 1.0;

  /// coeff * (-i hbar)^ddx_pow for term i.
  cplx expanded_coefficient(std::size_t i) const;
  std::string to_string() const;
};

/// x -> x, p -> -i hbar d/d(dx). One-dimensional expressions only.
DensityOperator compile_density_operator(const ObservableExpr& expr, const PhysicsParams& params);

/// coeff * hbar^hbar_pow * X^x_pow P^p_pow (all X left of all P per axis).
struct AmplitudeTerm {
  cplx coeff;
  Powers x_pow{};
  Powers p_pow{};
  int hbar_pow = 0;
};

class AmplitudeOperatorExpr {
 public:
  AmplitudeOperatorExpr() = default;
  AmplitudeOperatorExpr(std::vector<AmplitudeTerm> terms, double hbar);

  static AmplitudeOperatorExpr identity(double hbar);

  const std::vector<AmplitudeTerm>& terms() const { return terms_; }
  double hbar() const { return hbar_; }
  bool is_one_dimensional() const;

  AmplitudeOperatorExpr operator+(const AmplitudeOperatorExpr& o) const;
  AmplitudeOperatorExpr operator-(const AmplitudeOperatorExpr& o) const;
  AmplitudeOperatorExpr scaled(cplx c) const;
  /// Operator product, normal-ordered with [X_i, P_j] = i hbar delta_ij.
  AmplitudeOperatorExpr operator*(const AmplitudeOperatorExpr& o) const;

  std::string to_string() const;
  nlohmann::json to_json() const;
  static AmplitudeOperatorExpr from_json(const nlohmann::json& j, double hbar);

 private:
  void canonicalize();
  std::vector<AmplitudeTerm> terms_;
  double hbar_ = 1.0;
};

AmplitudeOperatorExpr commutator(const AmplitudeOperatorExpr& a, const AmplitudeOperatorExpr& b);

/// Leibniz expansion of the density operator on conj(psi(x - dx/2)) psi(x + dx/2)
/// at dx = 0, integration by parts onto psi, normal ordering. The real part
/// of the resulting expectation matches the density-operator expectation.
AmplitudeOperatorExpr reduce_to_amplitude_operator(const ObservableExpr& expr, const PhysicsParams& params);

/// Re of sum_x x^a (-i hbar d/d(dx))^b rho at dx = 0. `imag_residue`
/// receives the discarded imaginary part.
double expect_density(const DensityOperator& op, const DensityField& rho, double* imag_residue = nullptr);

/// Re <psi|O|psi> with spectral P powers (1-D operators).
double expect_amplitude(const AmplitudeOperatorExpr& op, const Amplitude& psi, double* imag_residue = nullptr);

/// sum f(x, p) F(x, p) dx dp.
double expect_phase_space(const ObservableExpr& expr, const PhaseSpaceField& f);

/// O psi on a 1-D grid.
std::vector<cplx> apply_amplitude_operator(const AmplitudeOperatorExpr& op, const Amplitude& psi);
/// O psi on an n^3 cube (row-major, axis 0 slowest) sharing one 1-D axis.
std::vector<cplx> apply_amplitude_operator_3d(const AmplitudeOperatorExpr& op, const std::vector<cplx>& psi,
                                              const Grid1D& axis);
/// O rho for a density operator.
std::vector<cplx> apply_density_operator(const DensityOperator& op, const DensityField& rho);

/// L2 norm of ([A, B] - expected) probe. On amplitudes `expected` is the
/// normal-ordered symbolic commutator; on densities it is zero.
double commutator_residual(const ObservableExpr& a, const ObservableExpr& b, const Amplitude& probe,
                           const PhysicsParams& params);
double commutator_residual(const ObservableExpr& a, const ObservableExpr& b, const DensityField& probe,
                           const PhysicsParams& params);

/// Delta x * Delta p from second central moments.
double uncertainty_product(const PhaseSpaceField& f);
double uncertainty_product(const DensityField& rho);
double uncertainty_product(const Amplitude& psi, double hbar);

}  // namespace wmb
