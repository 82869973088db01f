#include "wmbridge/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"
#include "wmbridge/quantum.hpp"
#include "wmbridge/spectral.hpp"

namespace wmb {

namespace {

constexpr std::size_t kMaskWidth = 3;

}  // namespace

EffectivePotentialField statistical_potential(const Amplitude& psi, const PhysicsParams& params,
                                              const PotentialSpec& v) {
  params.validate();
  const std::size_t n = psi.size();
  const auto fields = madelung_decompose(psi, params);
  EffectivePotentialField out;
  out.node_mask = widen_mask(fields.node_mask, kMaskWidth);
  out.v_classical = sample_potential(v, psi.grid(), params.mass);
  const auto r2 = spectral_derivative(std::span<const double>(fields.r_field), psi.grid(), 2);
  out.q_statistical.assign(n, 0.0);
  const double c = -params.hbar * params.hbar / (2.0 * params.mass);
  for (std::size_t j = 0; j < n; ++j)
    if (!out.node_mask[j]) out.q_statistical[j] = c * r2[j] / fields.r_field[j];
  out.v_eff.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.v_eff[j] = out.v_classical[j] + out.q_statistical[j];
  return out;
}

std::vector<double> sample_seeds(const Amplitude& psi, const PhysicsParams& params, std::size_t count,
                                 std::uint64_t rng_seed) {
  const auto& g = psi.grid();
  const std::size_t n = psi.size();
  const auto fields = madelung_decompose(psi, params);
  const auto mask = widen_mask(fields.node_mask, kMaskWidth);
  std::vector<double> knots(n + 1);
  std::vector<double> weights(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    knots[j] = g.origin() + static_cast<double>(j) * g.spacing();
    const std::size_t k = j % n;
    weights[j] = mask[k] ? 0.0 : std::norm(psi.values()[k]);
  }
  std::mt19937_64 rng(rng_seed);
  std::piecewise_linear_distribution<double> dist(knots.begin(), knots.end(), weights.begin());
  std::vector<double> out;
  out.reserve(count);
  while (out.size() < count) {
    const double x = g.wrap(dist(rng));
    const auto j = wrap_index(std::llround((x - g.origin()) / g.spacing()), n);
    if (!mask[j]) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BohmIntegrator::BohmIntegrator(std::vector<double> seeds, const Amplitude& psi0, const PhysicsParams& params)
    : params_(params), grid_(psi0.grid()), x_(std::move(seeds)), t_(psi0.time()) {
  params_.validate();
  current_ = prepare(psi0);
  flagged_.assign(x_.size(), 0);
  for (double x : x_)
    if (masked(current_, x)) throw SeedError("seed at x = " + std::to_string(x) + " lies in a node region");
}

BohmIntegrator::Snapshot BohmIntegrator::prepare(const Amplitude& psi) const {
  if (psi.grid() != grid_) throw GridMismatch("snapshot grid differs from the first snapshot");
  const auto fields = madelung_decompose(psi, params_);
  return {fields.velocity, widen_mask(fields.node_mask, kMaskWidth)};
}

double BohmIntegrator::velocity_at(const Snapshot& s, double x) const {
  const std::size_t n = grid_.size();
  const double u = (x - grid_.origin()) / grid_.spacing();
  const double base = std::floor(u);
  const double f = u - base;
  const auto j = static_cast<long long>(base);
  // cubic Lagrange through j-1 .. j+2
  const double w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const double w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  const double w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
  const double w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
  const auto& v = s.velocity;
  return w0 * v[wrap_index(j - 1, n)] + w1 * v[wrap_index(j, n)] + w2 * v[wrap_index(j + 1, n)] +
         w3 * v[wrap_index(j + 2, n)];
}

bool BohmIntegrator::masked(const Snapshot& s, double x) const {
  const auto j = wrap_index(std::llround((x - grid_.origin()) / grid_.spacing()), grid_.size());
  return s.mask[j] != 0;
}

void BohmIntegrator::advance(const Amplitude& next) {
  const double dt = next.time() - t_;
  Snapshot nxt = prepare(next);
  double v_max = 0.0;
  for (const auto* s : {&current_, &nxt})
    for (std::size_t j = 0; j < grid_.size(); ++j)
      if (!s->mask[j]) v_max = std::max(v_max, std::abs(s->velocity[j]));
  if (v_max * std::abs(dt) > grid_.spacing())
    throw StabilityError("max|v| dt = " + std::to_string(v_max * std::abs(dt)) + " exceeds the grid spacing");

  parallel_for(x_.size(), [&](std::size_t i) {
    const double x = x_[i];
    auto mid = [&](double y) { return 0.5 * (velocity_at(current_, y) + velocity_at(nxt, y)); };
    const double k1 = velocity_at(current_, x);
    const double k2 = mid(x + 0.5 * dt * k1);
    const double k3 = mid(x + 0.5 * dt * k2);
    const double k4 = velocity_at(nxt, x + dt * k3);
    x_[i] = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (masked(nxt, x_[i])) flagged_[i] = 1;
  });
  current_ = std::move(nxt);
  t_ = next.time();
}

std::vector<double> BohmIntegrator::momenta() const {
  std::vector<double> p(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) p[i] = params_.mass * velocity_at(current_, x_[i]);
  return p;
}

namespace {

void record(TrajectoryBundle& b, std::vector<std::vector<TrajectoryState>>& rows, const BohmIntegrator& integ) {
  const auto p = integ.momenta();
  b.times.push_back(integ.time());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].push_back({integ.positions()[i], p[i], integ.time()});
}

TrajectoryBundle assemble(TrajectoryBundle b, const std::vector<std::vector<TrajectoryState>>& rows,
                          const BohmIntegrator& integ) {
  b.kind = TrajectoryBundle::Kind::bohmian;
  b.n_trajectories = rows.size();
  b.flagged = integ.flagged();
  b.states.reserve(rows.size() * b.times.size());
  for (const auto& r : rows) b.states.insert(b.states.end(), r.begin(), r.end());
  return b;
}

}  // namespace

TrajectoryBundle integrate_bohm(const std::vector<Amplitude>& series, const std::vector<double>& seeds,
                                const PhysicsParams& params, std::size_t record_stride) {
  if (series.size() < 2) throw InputError("need at least two snapshots");
  if (record_stride == 0) throw InputError("record stride must be positive");
  const double dt = series[1].time() - series[0].time();
  for (std::size_t k = 1; k < series.size(); ++k)
    if (std::abs(series[k].time() - series[k - 1].time() - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw InputError("snapshots must be uniformly spaced in time");

  BohmIntegrator integ(seeds, series[0], params);
  TrajectoryBundle b;
  std::vector<std::vector<TrajectoryState>> rows(seeds.size());
  record(b, rows, integ);
  for (std::size_t k = 1; k < series.size(); ++k) {
    integ.advance(series[k]);
    if (k % record_stride == 0 || k + 1 == series.size()) record(b, rows, integ);
  }
  return assemble(std::move(b), rows, integ);
}

std::size_t count_crossings(const TrajectoryBundle& bundle, double tolerance) {
  const std::size_t nt = bundle.n_times();
  if (nt == 0) return 0;
  std::vector<std::size_t> order(bundle.n_trajectories);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bundle.at(a, 0).x < bundle.at(b, 0).x; });
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    for (std::size_t k = 0; k < nt; ++k)
      if (bundle.at(order[i], k).x > bundle.at(order[i + 1], k).x + tolerance) {
        ++count;
        break;
      }
  return count;
}

namespace {

// cumulative |psi|^2 at the cell edges x_j - dx/2, normalised to 1
std::vector<double> cell_cdf(const Amplitude& psi) {
  const std::size_t n = psi.size();
  std::vector<double> c(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) c[j + 1] = c[j] + std::norm(psi.values()[j]);
  for (auto& v : c) v /= c[n];
  return c;
}

double cdf_at(const std::vector<double>& c, const Grid1D& g, double x) {
  const double u = (x - g.origin()) / g.spacing() + 0.5;
  if (u <= 0.0) return 0.0;
  if (u >= static_cast<double>(g.size())) return 1.0;
  const auto j = static_cast<std::size_t>(u);
  const double f = u - static_cast<double>(j);
  return c[j] + f * (c[j + 1] - c[j]);
}

double quantile(const std::vector<double>& c, const Grid1D& g, double q) {
  const auto it = std::lower_bound(c.begin(), c.end(), q);
  const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - c.begin()));
  const double f = (q - c[j - 1]) / std::max(1e-300, c[j] - c[j - 1]);
  return g.origin() + (static_cast<double>(j - 1) + f - 0.5) * g.spacing();
}

}  // namespace

ScreenHistogram screen_histogram(const std::vector<double>& positions, const Amplitude& psi, std::size_t bins) {
  if (bins < 2) throw InputError("need at least two bins");
  const auto& g = psi.grid();
  const auto c = cell_cdf(psi);
  const double lo = quantile(c, g, 0.0005);
  const double hi = quantile(c, g, 0.9995);
  const double w = (hi - lo) / static_cast<double>(bins);
  ScreenHistogram h;
  h.bin_center.resize(bins);
  h.count.assign(bins, 0.0);
  h.expected.resize(bins);
  const double total = static_cast<double>(positions.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + w * static_cast<double>(b);
    h.bin_center[b] = a + 0.5 * w;
    h.expected[b] = total * (cdf_at(c, g, a + w) - cdf_at(c, g, a));
  }
  for (double x : positions) {
    const double u = (x - lo) / w;
    if (u < 0.0 || u >= static_cast<double>(bins)) continue;
    h.count[static_cast<std::size_t>(u)] += 1.0;
  }
  double chi2 = 0.0;
  for (std::size_t b = 0; b < bins; ++b)
    if (h.expected[b] > 0.0) chi2 += (h.count[b] - h.expected[b]) * (h.count[b] - h.expected[b]) / h.expected[b];
  h.chi2_per_dof = chi2 / static_cast<double>(bins - 1);
  return h;
}

double fringe_spacing(const Amplitude& psi, double mass) {
  const auto& g = psi.grid();
  const auto c = cell_cdf(psi);
  const double lo = quantile(c, g, 0.5 * (1.0 - mass));
  const double hi = quantile(c, g, 0.5 * (1.0 + mass));
  const std::size_t n = psi.size();
  std::vector<double> peaks;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double a = std::norm(psi.values()[j - 1]);
    const double b = std::norm(psi.values()[j]);
    const double d = std::norm(psi.values()[j + 1]);
    if (!(b > a && b >= d)) continue;
    // parabola through the three samples
    const double denom = a - 2.0 * b + d;
    const double shift = denom != 0.0 ? 0.5 * (a - d) / denom : 0.0;
    const double x = g.point(j) + shift * g.spacing();
    if (x >= lo && x <= hi) peaks.push_back(x);
  }
  if (peaks.size() < 2) return 0.0;
  return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

DoubleSlitResult double_slit_scenario(const DoubleSlitConfig& cfg, const PhysicsParams& params) {
  params.validate();
  if (cfg.points < 8) throw GridResolutionError("too few grid points");
  const auto g = Grid1D::centered(cfg.points, cfg.length);
  if (!(cfg.separation >= 6.0 * cfg.width))
    throw GridResolutionError("slit packets overlap: separation must be at least six widths");
  if (!(cfg.separation < 0.5 * cfg.length)) throw GridResolutionError("slit separation exceeds half the domain");
  if (!(cfg.screen_time > 0.0)) throw InputError("screen time must be positive");
  if (cfg.n_snapshots < 2) throw InputError("need at least two snapshots");

  const auto a = make_gaussian_amplitude(g, -0.5 * cfg.separation, cfg.momentum, cfg.width, params.hbar);
  const auto b = make_gaussian_amplitude(g, 0.5 * cfg.separation, cfg.momentum, cfg.width, params.hbar);
  std::vector<cplx> v(g.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = a.values()[j] + b.values()[j];
  Amplitude psi = Amplitude(g, std::move(v)).normalized();

  DoubleSlitResult out;
  out.seeds = sample_seeds(psi, params, cfg.n_seeds, cfg.rng_seed);
  BohmIntegrator integ(out.seeds, psi, params);

  const std::size_t steps = step_count(0.0, cfg.screen_time, cfg.dt);
  const double h = cfg.screen_time / static_cast<double>(steps);
  std::vector<std::size_t> marks(cfg.n_snapshots);
  for (std::size_t k = 0; k < marks.size(); ++k)
    marks[k] = static_cast<std::size_t>(std::llround(static_cast<double>(k * steps) / static_cast<double>(marks.size() - 1)));

  TrajectoryBundle bundle;
  std::vector<std::vector<TrajectoryState>> rows(out.seeds.size());
  auto snapshot = [&] {
    out.snapshots.push_back(psi);
    out.q_fields.push_back(statistical_potential(psi, params));
    record(bundle, rows, integ);
  };
  snapshot();
  std::vector<std::uint8_t> crossed(out.seeds.size(), 0);
  std::vector<std::uint8_t> overtaken(out.seeds.size(), 0);
  std::size_t next_mark = 1;
  for (std::size_t s = 1; s <= steps; ++s) {
    psi = evolve_amplitude_second_eq(psi, PotentialSpec::free_particle(), params, h * static_cast<double>(s), h);
    integ.advance(psi);
    const auto& x = integ.positions();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (out.seeds[i] * x[i] < 0.0) crossed[i] = 1;
      if (i + 1 < x.size() && x[i] > x[i + 1]) overtaken[i] = 1;
    }
    if (next_mark < marks.size() && s == marks[next_mark]) {
      snapshot();
      ++next_mark;
    }
  }
  out.trajectories = assemble(std::move(bundle), rows, integ);
  for (auto c : crossed) out.axis_crossings += c;
  for (auto c : overtaken) out.crossings += c;
  out.screen = screen_histogram(integ.positions(), psi, cfg.n_bins);
  out.fringe_spacing = fringe_spacing(psi);
  out.predicted_spacing = 2.0 * std::numbers::pi * params.hbar * cfg.screen_time / (params.mass * cfg.separation);
  return out;
}

}  // namespace wmb
