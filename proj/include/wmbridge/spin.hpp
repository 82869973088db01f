#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "wmbridge/fields.hpp"
#include "wmbridge/potential.hpp"

namespace wmb {

using Vec3 = std::array<double, 3>;

/// 2x2-matrix-valued density function over the (x, dx) chart of
/// DensityField. Four planes in block order uu, ud, du, dd.
class SpinDensityField {
 public:
  static constexpr std::array<const char*, 4> kBlockOrder{"uu", "ud", "du", "dd"};

  SpinDensityField(Grid1D grid_y, std::array<std::vector<cplx>, 4> planes, double hbar, double time = 0.0);

  const Grid1D& grid_y() const { return grid_y_; }
  std::size_t size() const { return grid_y_.size(); }
  double hbar() const { return hbar_; }
  double time() const { return time_; }
  const std::array<std::vector<cplx>, 4>& planes() const { return planes_; }
  /// Block (a, b), a and b in {0 (up), 1 (down)}, as a scalar density field.
  DensityField block(int a, int b) const;
  Eigen::Matrix2cd matrix_at(std::size_t ix, std::size_t idx) const;

  /// Spin trace plus integral over the diagonal.
  double trace() const;
  /// Largest |rho_ab(x, -dx) - conj(rho_ba(x, dx))|, including the
  /// diagonal column and the self-mirrored column dx = -L/2.
  double hermiticity_defect() const;

 private:
  Grid1D grid_y_;
  std::array<std::vector<cplx>, 4> planes_;
  double hbar_;
  double time_;
};

/// densify(psi) times the spinor projector chi chi^dagger (chi normalised).
SpinDensityField make_spin_density(const Amplitude& psi, const std::array<cplx, 2>& chi, double hbar);

struct MagneticFieldSpec {
  enum class Kind { uniform, linear_gradient };
  Kind kind = Kind::uniform;
  Vec3 h0{};
  /// dH_i/dx_j; on a 1-D grid only column 0 (d/dx) enters.
  std::array<Vec3, 3> gradient{};

  static MagneticFieldSpec uniform(Vec3 h0);
  static MagneticFieldSpec linear_gradient(Vec3 h0, std::array<Vec3, 3> g);
  Vec3 at(double x) const;
  bool is_zero() const;
};

/// m_i = g (e / 2mc) (hbar / 2) sigma_i.
struct SpinAlgebra {
  std::array<Eigen::Matrix2cd, 3> m;
  double hbar = 1.0;
  /// g e / (2 m c).
  double gyromagnetic = 1.0;
};

SpinAlgebra make_spin_algebra(const PhysicsParams& params);

enum class CommutatorForm {
  /// [m_i, m_j] = i hbar eps_ijk m_k, the relation exactly as written.
  as_printed,
  /// [m_i, m_j] = i hbar gamma eps_ijk m_k with gamma = g e / 2mc.
  scaled,
};

/// Max Frobenius norm of the commutator defect over (i, j).
double spin_commutator_check(const SpinAlgebra& algebra, CommutatorForm form = CommutatorForm::as_printed);

/// dm_i/dt = eps_ijk m_k H_j, index order as written (this is H x m).
Vec3 precession_rhs(const Vec3& m, const Vec3& h);

/// RK4 trajectory of the precession equation, sampled every step.
std::vector<Vec3> integrate_precession(const Vec3& m0, const Vec3& h, double t_final, double dt);

/// i hbar d rho/dt = kinetic + [V(y) - V(y')] rho + (m.H(y)) rho - rho (m.H(y')).
/// Strang split like evolve_density_first_eq; the multiplicative step is
/// rho -> U(y) rho U(y')^dagger with U = exp(-i m.H tau / hbar), the scalar
/// phase of V riding along.
SpinDensityField evolve_pauli(const SpinDensityField& rho, const PotentialSpec& v, const MagneticFieldSpec& h,
                              const PhysicsParams& params, double t_final, double dt);

/// <m_i> = sum_x Tr(m_i rho(x, x)) dx.
Vec3 spin_expectation(const SpinDensityField& rho, const SpinAlgebra& algebra);

}  // namespace wmb
