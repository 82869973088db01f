#pragma once

#include <Eigen/Dense>
#include <vector>

#include "json.hpp"
#include "wmbridge/fields.hpp"
#include "wmbridge/operators.hpp"
#include "wmbridge/potential.hpp"

namespace wmb {

struct MixtureComponent {
  double weight = 0.0;
  Amplitude psi;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
  /// Throws SpecError unless weights are >= 0, sum to 1 within 1e-12 and
  /// every component shares one grid.
  void validate() const;
};

/// sum_n W_n densify(psi_n).
DensityField mix(const MixtureSpec& spec, double hbar);

/// Orthonormal amplitudes on one grid.
class BasisSet {
 public:
  /// Throws SpecError if the Gram matrix is off the identity by more than 1e-8.
  explicit BasisSet(std::vector<Amplitude> states);

  std::size_t size() const { return states_.size(); }
  const Grid1D& grid() const { return states_.front().grid(); }
  const std::vector<Amplitude>& states() const { return states_; }
  /// Max |<phi_i|phi_j> - delta_ij|.
  double gram_defect() const;

  /// Modified Gram-Schmidt on the given amplitudes.
  static BasisSet orthonormalize(const std::vector<Amplitude>& states);

 private:
  std::vector<Amplitude> states_;
};

/// Lowest `count` eigenstates of P^2/2m + V by imaginary-time iteration
/// psi <- (1 - tau H) psi with H applied spectrally, re-orthonormalised by
/// Gram-Schmidt every sweep. Stops when every residual |H psi - E psi| is
/// below `tol`; StabilityError if that does not happen in `max_sweeps`.
BasisSet relaxed_eigenbasis(const Grid1D& grid, const PotentialSpec& v, const PhysicsParams& params, std::size_t count,
                            double tol = 1e-9, std::size_t max_sweeps = 200000);

/// Eigenvalues matching relaxed_eigenbasis (Rayleigh quotients).
std::vector<double> rayleigh_energies(const BasisSet& basis, const PotentialSpec& v, const PhysicsParams& params);

class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd m);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  double trace() const { return m_.trace().real(); }
  double purity() const;
  /// Throws DensityFormatError unless Hermitian (1e-10), unit trace (1e-8)
  /// and eigenvalues >= -1e-8.
  void validate() const;

  /// {"dimensions": [n, n], "entries": [[re, im], ...]} row-major; n <= 64.
  nlohmann::json to_json() const;
  static DensityMatrix from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXcd m_;
};

/// rho_{m m'} = sum_n W_n a_m conj(a_m'), a_m = <phi_m|psi_n>. Throws
/// TruncationError listing per-component residuals above 1e-6.
DensityMatrix density_matrix_in_basis(const MixtureSpec& spec, const BasisSet& basis);

/// Re Tr(rho Q) with Q_{m' m} = <phi_m'|Q|phi_m>.
double trace_expectation(const DensityMatrix& dm, const AmplitudeOperatorExpr& op, const BasisSet& basis);

struct FactorizationResult {
  bool is_pure = false;
  double score = 0.0;
};

/// Largest eigenvalue over the sum of absolute eigenvalues of rho read as a
/// kernel rho(y, y') on the even sublattice (the chart stores integer pairs
/// only at even dx offsets). Throws DensityFormatError for non-Hermitian input.
FactorizationResult factorization_test(const DensityField& rho);

}  // namespace wmb
