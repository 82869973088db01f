#include "wmbridge/collisions.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wmbridge/classical.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"
#include "wmbridge/wigner.hpp"

namespace wmb {

namespace {

// lower cell and its weight for momentum p; false when p is off the grid
bool split_cell(const Grid1D& axis, double p, std::uint32_t& lo, double& w_lo) {
  const double u = (p - axis.origin()) / axis.spacing();
  const auto last = static_cast<double>(axis.size() - 1);
  if (u < -1e-12 || u > last + 1e-12) return false;
  const double base = std::clamp(std::floor(u), 0.0, last - 1.0);
  lo = static_cast<std::uint32_t>(base);
  w_lo = 1.0 - (u - base);
  // exact hits keep all weight in one cell
  if (std::abs(w_lo - 1.0) < 1e-12) w_lo = 1.0;
  if (std::abs(w_lo) < 1e-12) {
    ++lo;
    w_lo = 1.0;
  }
  return true;
}

void fnv(std::uint64_t& h, double v) {
  unsigned char bytes[sizeof(double)];
  std::memcpy(bytes, &v, sizeof(double));
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
}

}  // namespace

CollisionKernel CollisionKernel::build(const Grid1D& p1_axis, const Grid1D& p2_axis, double m1, double m2,
                                       double strength) {
  if (!(m1 > 0.0) || !(m2 > 0.0)) throw SpecError("species masses must be positive");
  if (!(strength >= 0.0) || !std::isfinite(strength)) throw SpecError("collision strength must be non-negative");
  CollisionKernel k(p1_axis, p2_axis);
  k.m1_ = m1;
  k.m2_ = m2;
  k.strength_ = strength;
  const double mt = m1 + m2;
  for (std::uint32_t i1 = 0; i1 < p1_axis.size(); ++i1)
    for (std::uint32_t i2 = 0; i2 < p2_axis.size(); ++i2) {
      const double p1 = p1_axis.point(i1);
      const double p2 = p2_axis.point(i2);
      Entry e;
      e.i1 = i1;
      e.i2 = i2;
      e.speed = std::abs(p1 / m1 - p2 / m2);
      if (e.speed == 0.0) continue;
      e.p1_out = ((m1 - m2) * p1 + 2.0 * m1 * p2) / mt;
      e.p2_out = ((m2 - m1) * p2 + 2.0 * m2 * p1) / mt;
      // outcomes off the grid have no support
      if (!split_cell(p1_axis, e.p1_out, e.o1, e.w1)) continue;
      if (!split_cell(p2_axis, e.p2_out, e.o2, e.w2)) continue;
      k.entries_.push_back(e);
    }
  return k;
}

std::uint64_t CollisionKernel::grid_checksum() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto* a : {&p1_, &p2_}) {
    fnv(h, static_cast<double>(a->size()));
    fnv(h, a->length());
    fnv(h, a->origin());
  }
  return h;
}

nlohmann::json CollisionKernel::to_json() const {
  return {{"m1", m1_}, {"m2", m2_}, {"strength", strength_}, {"grid_checksum", std::to_string(grid_checksum())}};
}

CollisionKernel CollisionKernel::from_json(const nlohmann::json& j, const Grid1D& p1_axis, const Grid1D& p2_axis) {
  auto k = build(p1_axis, p2_axis, j.at("m1").get<double>(), j.at("m2").get<double>(), j.at("strength").get<double>());
  if (j.contains("grid_checksum") && j.at("grid_checksum").get<std::string>() != std::to_string(k.grid_checksum()))
    throw SpecError("collision kernel grid checksum does not match the momentum grids");
  k.validate();
  return k;
}

void CollisionKernel::validate() const {
  const double mt = m1_ + m2_;
  for (const auto& e : entries_) {
    const double p1 = p1_.point(e.i1);
    const double p2 = p2_.point(e.i2);
    // elastic: momentum and energy of the continuous outcome
    if (std::abs(e.p1_out + e.p2_out - p1 - p2) > 1e-9 * (1.0 + std::abs(p1) + std::abs(p2)))
      throw SpecError("kernel entry does not conserve momentum");
    const double before = p1 * p1 / (2.0 * m1_) + p2 * p2 / (2.0 * m2_);
    const double after = e.p1_out * e.p1_out / (2.0 * m1_) + e.p2_out * e.p2_out / (2.0 * m2_);
    if (std::abs(after - before) > 1e-9 * (1.0 + before)) throw SpecError("kernel entry does not conserve energy");
    // snapped cells within half a cell of the nearest grid point
    const double c1 = p1_.point(e.o1) * e.w1 + (e.w1 < 1.0 ? p1_.point(e.o1 + 1) * (1.0 - e.w1) : 0.0);
    const double c2 = p2_.point(e.o2) * e.w2 + (e.w2 < 1.0 ? p2_.point(e.o2 + 1) * (1.0 - e.w2) : 0.0);
    if (std::abs(c1 - e.p1_out) > 0.5 * p1_.spacing() || std::abs(c2 - e.p2_out) > 0.5 * p2_.spacing() ||
        std::abs(p1_.point(e.o1) - e.p1_out) > p1_.spacing() * (1.0 + 1e-9) ||
        std::abs(p2_.point(e.o2) - e.p2_out) > p2_.spacing() * (1.0 + 1e-9))
      throw SpecError("kernel outcome snapped beyond half a cell");
    // reverse arrangement maps back with the same rate
    const double r1 = ((m1_ - m2_) * e.p1_out + 2.0 * m1_ * e.p2_out) / mt;
    const double r2 = ((m2_ - m1_) * e.p2_out + 2.0 * m2_ * e.p1_out) / mt;
    if (std::abs(r1 - p1) > 1e-9 * (1.0 + std::abs(p1)) || std::abs(r2 - p2) > 1e-9 * (1.0 + std::abs(p2)))
      throw SpecError("kernel is not symmetric under the inverse collision");
    if (std::abs(std::abs(e.p1_out / m1_ - e.p2_out / m2_) - e.speed) > 1e-9 * (1.0 + e.speed))
      throw SpecError("relative speed changed across the collision");
  }
}

namespace {

void check_compatible(const CoupledEnsembles& ens, const CollisionKernel& k) {
  if (ens.f1.grid().x_axis() != ens.f2.grid().x_axis()) throw GridMismatch("species do not share the x axis");
  if (ens.f1.grid().p_axis() != k.p1_axis() || ens.f2.grid().p_axis() != k.p2_axis())
    throw GridMismatch("kernel momentum grids differ from the ensembles");
}

// events(i1, i2) = strength * speed * n1 * n2 with n = F dp; gain/loss per species
void accumulate(const CoupledEnsembles& ens, const CollisionKernel& k, std::vector<double>& d1, std::vector<double>& d2) {
  const std::size_t nx = ens.f1.grid().nx();
  const std::size_t np1 = k.p1_axis().size();
  const std::size_t np2 = k.p2_axis().size();
  const double dp1 = k.p1_axis().spacing();
  const double dp2 = k.p2_axis().spacing();
  d1.assign(nx * np1, 0.0);
  d2.assign(nx * np2, 0.0);
  if (k.strength() == 0.0) return;
  const auto& f1 = ens.f1.values();
  const auto& f2 = ens.f2.values();
  parallel_for(nx, [&](std::size_t ix) {
    double* g1 = d1.data() + ix * np1;
    double* g2 = d2.data() + ix * np2;
    const double* a = f1.data() + ix * np1;
    const double* b = f2.data() + ix * np2;
    for (const auto& e : k.entries()) {
      const double ev = k.strength() * e.speed * a[e.i1] * dp1 * b[e.i2] * dp2;
      if (ev == 0.0) continue;
      g1[e.i1] -= ev;
      g2[e.i2] -= ev;
      g1[e.o1] += e.w1 * ev;
      if (e.w1 < 1.0) g1[e.o1 + 1] += (1.0 - e.w1) * ev;
      g2[e.o2] += e.w2 * ev;
      if (e.w2 < 1.0) g2[e.o2 + 1] += (1.0 - e.w2) * ev;
    }
    for (std::size_t i = 0; i < np1; ++i) g1[i] /= dp1;
    for (std::size_t i = 0; i < np2; ++i) g2[i] /= dp2;
  });
}

}  // namespace

std::vector<double> collision_term(const CoupledEnsembles& ens, const CollisionKernel& kernel, int species) {
  if (species != 1 && species != 2) throw InputError("species must be 1 or 2");
  check_compatible(ens, kernel);
  std::vector<double> d1, d2;
  accumulate(ens, kernel, d1, d2);
  return species == 1 ? d1 : d2;
}

namespace {

double p_extent(const Grid1D& p) { return std::max(std::abs(p.origin()), std::abs(p.origin() + p.length())); }

void check_transport(const PhaseSpaceGrid& g, const std::vector<double>& force, double mass, double h) {
  if (p_extent(g.p_axis()) * std::abs(h) / mass > 0.25 * g.x_axis().length())
    throw StabilityError("drift per step exceeds a quarter of the x domain");
  double f_max = 0.0;
  for (double f : force) f_max = std::max(f_max, std::abs(f));
  if (f_max * std::abs(h) > 0.25 * g.p_axis().length())
    throw StabilityError("kick per step exceeds a quarter of the p domain");
}

}  // namespace

CoupledEnsembles evolve_coupled(const CoupledEnsembles& ens, const PotentialSpec& v1, const PotentialSpec& v2,
                                const CollisionKernel& kernel, const PhysicsParams& params, double t_final, double dt) {
  params.validate();
  check_compatible(ens, kernel);
  const std::size_t steps = step_count(ens.f1.time(), t_final, dt);
  if (steps == 0) return ens;
  const double h = (t_final - ens.f1.time()) / static_cast<double>(steps);
  if (kernel.strength() * std::abs(h) > 0.1 + 1e-12) throw StabilityError("collision sub-step bound strength*dt <= 0.1 violated");

  const auto& g1 = ens.f1.grid();
  const auto& g2 = ens.f2.grid();
  std::vector<double> force1, force2;
  if (v1.kind != PotentialSpec::Kind::free) force1 = sample_force(v1, g1.x_axis(), kernel.m1());
  if (v2.kind != PotentialSpec::Kind::free) force2 = sample_force(v2, g2.x_axis(), kernel.m2());
  check_transport(g1, force1, kernel.m1(), h);
  check_transport(g2, force2, kernel.m2(), h);

  std::vector<double> a = ens.f1.values();
  std::vector<double> b = ens.f2.values();
  const bool collide = kernel.strength() > 0.0;
  std::vector<double> d1, d2;
  auto collision_half = [&] {
    CoupledEnsembles cur{PhaseSpaceField(g1, a), PhaseSpaceField(g2, b)};
    accumulate(cur, kernel, d1, d2);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += 0.5 * h * d1[i];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.5 * h * d2[i];
  };
  for (std::size_t s = 0; s < steps; ++s) {
    if (collide) collision_half();
    liouville_step(a, g1, force1, kernel.m1(), h);
    liouville_step(b, g2, force2, kernel.m2(), h);
    if (collide) collision_half();
  }
  const double lowest = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  if (lowest < -1e-6) throw StabilityError("negative overshoot " + std::to_string(lowest) + " in coupled evolution");
  return {PhaseSpaceField(g1, std::move(a), t_final), PhaseSpaceField(g2, std::move(b), t_final)};
}

DensityField transformed_collision_rhs(const CoupledEnsembles& ens, const CollisionKernel& kernel, int species) {
  const auto d = collision_term(ens, kernel, species);
  const auto& f = species == 1 ? ens.f1 : ens.f2;
  return wigner_moyal_forward(PhaseSpaceField(f.grid(), d, f.time()));
}

double coupled_entropy(const CoupledEnsembles& ens) {
  double s = 0.0;
  for (const auto* f : {&ens.f1, &ens.f2}) {
    double part = 0.0;
    for (double v : f->values())
      if (v > 0.0) part -= v * std::log(v);
    s += part * f->grid().x_axis().spacing() * f->grid().p_axis().spacing();
  }
  return s;
}

SpeciesMoments species_moments(const PhaseSpaceField& f, double mass) {
  const auto& g = f.grid();
  SpeciesMoments m;
  for (std::size_t ix = 0; ix < g.nx(); ++ix)
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
      const double p = g.p_axis().point(ip);
      const double v = f.at(ix, ip);
      m.number += v;
      m.momentum += p * v;
      m.kinetic_energy += p * p / (2.0 * mass) * v;
    }
  const double cell = g.x_axis().spacing() * g.p_axis().spacing();
  m.number *= cell;
  m.momentum *= cell;
  m.kinetic_energy *= cell;
  return m;
}

double offdiagonal_norm(const DensityField& rho, std::size_t idx) {
  double s = 0.0;
  for (std::size_t ix = 0; ix < rho.size(); ++ix) s += std::norm(rho.at(ix, idx));
  return std::sqrt(s * rho.grid_y().spacing());
}

}  // namespace wmb
