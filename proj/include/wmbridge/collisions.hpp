#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "wmbridge/fields.hpp"
#include "wmbridge/potential.hpp"

namespace wmb {

/// Two species on a shared x axis with their own momentum axes.
struct CoupledEnsembles {
  PhaseSpaceField f1;
  PhaseSpaceField f2;
};

/// Elastic two-body kernel on the discrete momentum grids. In 1-D an
/// elastic pair either keeps its momenta (identity branch, no net effect)
/// or exchanges them by the mass-weighted formulas (exchange branch). Each
/// exchange outcome is split between the two nearest cells so that the
/// mean momentum of every species lands exactly on the continuous outcome.
class CollisionKernel {
 public:
  struct Entry {
    std::uint32_t i1 = 0;
    std::uint32_t i2 = 0;
    /// |p1/m1 - p2/m2|
    double speed = 0.0;
    double p1_out = 0.0;
    double p2_out = 0.0;
    std::uint32_t o1 = 0;  // lower cell; o1 + 1 receives 1 - w1
    double w1 = 1.0;
    std::uint32_t o2 = 0;
    double w2 = 1.0;
  };

  static CollisionKernel build(const Grid1D& p1_axis, const Grid1D& p2_axis, double m1, double m2, double strength);

  double strength() const { return strength_; }
  double m1() const { return m1_; }
  double m2() const { return m2_; }
  const Grid1D& p1_axis() const { return p1_; }
  const Grid1D& p2_axis() const { return p2_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool symmetric() const { return true; }

  /// FNV-1a over both momentum axes.
  std::uint64_t grid_checksum() const;
  nlohmann::json to_json() const;
  /// Rebuilds from {m1, m2, strength, grid_checksum}; SpecError when the
  /// checksum does not match the supplied axes.
  static CollisionKernel from_json(const nlohmann::json& j, const Grid1D& p1_axis, const Grid1D& p2_axis);

  /// Re-checks reverse symmetry and elastic support; throws SpecError.
  void validate() const;

 private:
  CollisionKernel(Grid1D p1, Grid1D p2) : p1_(p1), p2_(p2) {}
  Grid1D p1_;
  Grid1D p2_;
  double m1_ = 1.0;
  double m2_ = 1.0;
  double strength_ = 0.0;
  std::vector<Entry> entries_;
};

/// Gain minus loss for one species (1 or 2), shaped like that species' field.
std::vector<double> collision_term(const CoupledEnsembles& ens, const CollisionKernel& kernel, int species);

/// Strang splitting: C(dt/2) T(dt) C(dt/2), collisions by explicit Euler,
/// transport by the Liouville stepper with each species' mass from the
/// kernel. Needs strength * dt <= 0.1.
CoupledEnsembles evolve_coupled(const CoupledEnsembles& ens, const PotentialSpec& v1, const PotentialSpec& v2,
                                const CollisionKernel& kernel, const PhysicsParams& params, double t_final, double dt);

/// Collision term carried to the (x, dx) chart by the forward Wigner-Moyal
/// transform (species grid must be dual).
DensityField transformed_collision_rhs(const CoupledEnsembles& ens, const CollisionKernel& kernel, int species);

/// -sum F log F dx dp over both species (F <= 0 contributes nothing).
double coupled_entropy(const CoupledEnsembles& ens);

struct SpeciesMoments {
  double number = 0.0;
  double momentum = 0.0;
  double kinetic_energy = 0.0;
};

SpeciesMoments species_moments(const PhaseSpaceField& f, double mass);

/// sqrt(sum_x |rho(x, dx_k)|^2 dx) for dx column `idx`.
double offdiagonal_norm(const DensityField& rho, std::size_t idx);

}  // namespace wmb
