#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>

#include "wmbridge/bohm.hpp"
#include "wmbridge/classical.hpp"
#include "wmbridge/collisions.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/io.hpp"
#include "wmbridge/mixtures.hpp"
#include "wmbridge/operators.hpp"
#include "wmbridge/quantum.hpp"
#include "wmbridge/scenario.hpp"
#include "wmbridge/spin.hpp"
#include "wmbridge/wigner.hpp"

namespace wmb {

using nlohmann::json;

namespace {

struct Run {
  const ScenarioConfig& cfg;
  fs::path dir;
  ComparisonReport report;
  json observables = json::object();
  json quantities = json::object();

  const json& section(const char* name) const { return cfg.resolved.at(name); }
  double num(const char* sec, const char* key) const { return section(sec).at(key).get<double>(); }
  std::size_t count(const char* sec, const char* key) const { return section(sec).at(key).get<std::size_t>(); }
  double tol(const char* key) const { return num("tolerances", key); }

  void table(const std::string& name, std::vector<std::string> columns, const std::vector<std::vector<double>>& rows) {
    quantities[name] = {{"columns", columns}, {"rows", rows}};
  }
};

PotentialSpec potential_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "free") return PotentialSpec::free_particle();
  if (kind == "harmonic") return PotentialSpec::harmonic(j.at("omega").get<double>());
  if (kind == "linear") return PotentialSpec::linear(j.at("force").get<double>());
  if (kind == "quartic") return PotentialSpec::quartic(j.at("lambda").get<double>());
  return PotentialSpec::double_gaussian_barrier(j.at("barrier_height").get<double>(),
                                                j.at("barrier_center").get<double>(),
                                                j.at("barrier_width").get<double>());
}

Grid1D grid_from(const Run& r) { return Grid1D::centered(r.count("grid", "points"), r.num("grid", "length")); }

std::vector<double> snapshot_times(const Run& r) {
  const double t_final = r.num("time", "t_final");
  const std::size_t s = r.count("time", "snapshots");
  std::vector<double> t(s);
  for (std::size_t k = 0; k < s; ++k) t[k] = t_final * static_cast<double>(k) / static_cast<double>(s - 1);
  return t;
}

double l2_distance(const std::vector<cplx>& a, const std::vector<cplx>& b, double cell) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * cell);
}

double mean_density(const char* text, const DensityField& rho, const PhysicsParams& p) {
  return expect_density(compile_density_operator(parse_observable(text), p), rho) / rho.trace();
}

json series_params(const Run& r) {
  json p = {{"physics", r.section("physics")}};
  if (r.cfg.resolved.contains("potential")) p["potential"] = r.section("potential");
  if (r.cfg.resolved.contains("grid")) p["grid"] = r.section("grid");
  return p;
}

// Two eigenstates, a boosted Gaussian, an offset Gaussian and a cat state.
std::vector<Amplitude> state_fleet(const Grid1D& g, const PhysicsParams& p) {
  const auto eig = relaxed_eigenbasis(g, PotentialSpec::harmonic(1.0), p, 2);
  const double h = p.hbar;
  std::vector<Amplitude> out{eig.states()[0], eig.states()[1], make_gaussian_amplitude(g, 0.3, 1.2, 0.8, h),
                             make_gaussian_amplitude(g, -0.5, -0.4, 1.1, h)};
  const auto a = make_gaussian_amplitude(g, -1.5, 0.5, 0.7, h);
  const auto b = make_gaussian_amplitude(g, 1.5, -0.5, 0.7, h);
  std::vector<cplx> cat(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) cat[j] = a.values()[j] + b.values()[j];
  out.push_back(Amplitude(g, cat).normalized());
  return out;
}

void bridge(Run& r) {
  const auto& p = r.cfg.physics;
  const auto v = potential_from(r.section("potential"));
  const auto ps = PhaseSpaceGrid::dual(grid_from(r), p.hbar);
  const double dt = r.num("time", "dt");
  auto f = make_gaussian_phase_space(ps, r.num("setup", "x0"), r.num("setup", "p0"), r.num("setup", "sigma_x"),
                                     r.num("setup", "sigma_p"));
  auto rho = wigner_moyal_forward(f);
  const double trace0 = rho.trace();
  const double cell = ps.x_axis().spacing() * ps.x_axis().spacing();
  SeriesWriter sf(r.dir / "fields" / "phase_space", dt, "liouville_strang", series_params(r), p.mass);
  SeriesWriter sc(r.dir / "fields" / "classical_density", dt, "liouville_strang+wigner_moyal", series_params(r), p.mass);
  SeriesWriter sq(r.dir / "fields" / "quantum_density", dt, "density_strang", series_params(r), p.mass);
  std::vector<std::vector<double>> rows;
  double l2 = 0.0;
  DensityField classical = rho;
  for (double t : snapshot_times(r)) {
    if (t > 0.0) {
      f = evolve_liouville(f, v, p, t, dt);
      rho = evolve_density_first_eq(rho, v, p, t, dt);
    }
    classical = wigner_moyal_forward(f);
    l2 = l2_distance(classical.values(), rho.values(), cell);
    sf.add(f);
    sc.add(classical);
    sq.add(rho);
    rows.push_back({t, l2});
  }
  sf.finish();
  sc.finish();
  sq.finish();
  r.table("bridge_distance_vs_time", {"t", "l2"}, rows);
  std::vector<std::vector<double>> dens;
  const auto dc = classical.diagonal();
  const auto dq = rho.diagonal();
  for (std::size_t j = 0; j < dc.size(); ++j) dens.push_back({ps.x_axis().point(j), dc[j], dq[j]});
  r.table("position_density", {"x", "classical", "quantum"}, dens);

  std::string expect = r.section("setup").at("expect").get<std::string>();
  if (expect == "auto") {
    const int degree = v.polynomial_degree();
    expect = degree >= 0 && degree <= 2 ? "agree" : "disagree";
  }
  if (expect == "agree")
    r.report.within("bridge_l2", l2, 0.0, r.tol("bridge_l2"));
  else
    r.report.at_least("bridge_l2", l2, r.tol("boundary_l2"));
  r.report.within("quantum_trace", rho.trace(), trace0, r.tol("trace"));
  r.observables["bridge_l2"] = l2;
  r.observables["quantum_trace"] = rho.trace();
}

void newton(Run& r) {
  const auto& p = r.cfg.physics;
  const auto v = potential_from(r.section("potential"));
  const auto g = grid_from(r);
  const auto ps = PhaseSpaceGrid::dual(g, p.hbar);
  const double dt = r.num("time", "dt");
  const double w = r.num("setup", "width_cells");
  const double sx = w * g.spacing();
  const double sp = w * ps.p_axis().spacing();
  double x = r.num("setup", "x0");
  double mom = r.num("setup", "p0");
  auto rho = wigner_moyal_forward(make_dispersion_free({x, mom, 0.0}, sx, sp, ps));
  SeriesWriter sq(r.dir / "fields" / "density", dt, "density_strang", series_params(r), p.mass);
  TrajectoryBundle path;
  path.n_trajectories = 1;
  path.flagged = {0};
  std::vector<std::vector<double>> rows;
  double worst_x = 0.0, worst_p = 0.0, last = 0.0;
  for (double t : snapshot_times(r)) {
    if (t > 0.0) {
      rho = evolve_density_first_eq(rho, v, p, t, dt);
      const auto seg = integrate_newton(x, mom, v, p, t - last, dt);
      x = seg.states.back().x;
      mom = seg.states.back().p;
    }
    last = t;
    const double xq = mean_density("x", rho, p);
    const double pq = mean_density("p", rho, p);
    worst_x = std::max(worst_x, std::abs(xq - x));
    worst_p = std::max(worst_p, std::abs(pq - mom));
    path.times.push_back(t);
    path.states.push_back({x, mom, t});
    rows.push_back({t, xq, pq, x, mom});
    sq.add(rho);
  }
  sq.finish();
  write_trajectories(r.dir / "trajectories" / "newton.csv", path);
  r.table("centroid_vs_time", {"t", "x_quantum", "p_quantum", "x_newton", "p_newton"}, rows);
  const double frac = r.tol("centroid_fraction");
  r.report.at_most("max_x_deviation", worst_x, frac * sx);
  r.report.at_most("max_p_deviation", worst_p, frac * sp);
  r.observables["sigma_x"] = sx;
  r.observables["sigma_p"] = sp;
  r.observables["max_x_deviation"] = worst_x;
  r.observables["max_p_deviation"] = worst_p;
}

void roundtrip(Run& r) {
  const auto& p = r.cfg.physics;
  const auto g = grid_from(r);
  const auto text = r.section("setup").at("observable").get<std::string>();
  const auto expr = parse_observable(text);
  const auto reduced = reduce_to_amplitude_operator(expr, p);
  const auto dop = compile_density_operator(expr, p);
  write_json(r.dir / "reduced_operator.json",
             {{"observable", text}, {"reduced", reduced.to_json()}, {"text", reduced.to_string()}});
  std::string compact;
  for (char c : text)
    if (c != ' ') compact += c;
  if (compact == "p^2*x^2")
    r.report.within("golden_form", reduced.to_string() == "X^2 P^2 - i hbar X P" ? 1.0 : 0.0, 1.0, 0.0);

  std::vector<std::vector<double>> rows;
  const auto fleet = state_fleet(g, p);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto rho = densify(fleet[i], p.hbar);
    const double d = expect_density(dop, rho);
    const double a = expect_amplitude(reduced, fleet[i]);
    const double f = expect_phase_space(expr, wigner_inverse(rho));
    const double scale = std::max(1.0, std::abs(d));
    const auto tag = "state" + std::to_string(i);
    r.report.within(tag + "/amplitude", a, d, r.tol("density_amplitude") * scale);
    r.report.within(tag + "/phase_space", f, d, r.tol("density_phase_space") * scale);
    rows.push_back({static_cast<double>(i), d, a, f});
    r.observables[tag + "/density"] = d;
  }
  r.table("expectations", {"state", "density", "amplitude", "phase_space"}, rows);
}

struct Spread {
  double dx, dp;
};

Spread spread(const Amplitude& psi, const PhysicsParams& p) {
  auto e = [&](const char* t) { return expect_amplitude(reduce_to_amplitude_operator(parse_observable(t), p), psi); };
  const double n = psi.norm_squared();
  const double mx = e("x") / n, mp = e("p") / n;
  return {std::sqrt(std::max(0.0, e("x^2") / n - mx * mx)), std::sqrt(std::max(0.0, e("p^2") / n - mp * mp))};
}

void survey(Run& r) {
  const auto& p = r.cfg.physics;
  const auto g = grid_from(r);
  const double half = 0.5 * p.hbar;
  const auto fleet = state_fleet(g, p);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const double u = uncertainty_product(fleet[i], p.hbar);
    r.report.at_least("state" + std::to_string(i) + "/product", u, half - r.tol("bound"));
    r.observables["state" + std::to_string(i) + "/product"] = u;
  }
  const double umin = uncertainty_product(make_gaussian_amplitude(g, 0.4, -0.6, 0.9, p.hbar), p.hbar);
  r.report.within("minimum_gaussian", umin, half, r.tol("bound"));

  const auto ps = PhaseSpaceGrid::dual(Grid1D::centered(r.count("setup", "classical_points"),
                                                        r.num("setup", "classical_length")),
                                       p.hbar);
  const double csx = r.num("setup", "classical_sigma_x"), csp = r.num("setup", "classical_sigma_p");
  const double uc = uncertainty_product(make_gaussian_phase_space(ps, 0.3, 0.2, csx, csp));
  r.report.within("classical_product", uc, csx * csp, r.tol("classical"));
  r.observables["classical_product"] = uc;

  const double dt = r.num("time", "dt");
  auto psi = make_gaussian_amplitude(g, 0.0, r.num("setup", "p0"), r.num("setup", "sigma_x"), p.hbar);
  SeriesWriter sw(r.dir / "fields" / "spreading", dt, "amplitude_split_operator", series_params(r), p.mass);
  std::vector<std::vector<double>> rows;
  double prev = 0.0, worst = 0.0;
  bool first = true;
  for (double t : snapshot_times(r)) {
    if (t > 0.0) psi = evolve_amplitude_second_eq(psi, PotentialSpec::free_particle(), p, t, dt);
    const auto s = spread(psi, p);
    const double u = s.dx * s.dp;
    if (!first) worst = std::min(worst, u - prev);
    first = false;
    prev = u;
    rows.push_back({t, s.dx, s.dp, u});
    sw.add(psi, p.hbar);
  }
  sw.finish();
  r.table("uncertainty_vs_time", {"t", "dx", "dp", "product"}, rows);
  r.report.at_least("spreading_min_increment", worst, -1e-12);
}

void double_slit(Run& r) {
  const auto& p = r.cfg.physics;
  DoubleSlitConfig c;
  c.points = r.count("grid", "points");
  c.length = r.num("grid", "length");
  c.screen_time = r.num("time", "t_final");
  c.dt = r.num("time", "dt");
  c.n_snapshots = r.count("time", "snapshots");
  c.separation = r.num("setup", "separation");
  c.width = r.num("setup", "width");
  c.momentum = r.num("setup", "momentum");
  c.n_seeds = r.count("setup", "seeds");
  c.n_bins = r.count("setup", "bins");
  c.rng_seed = r.cfg.rng_seed;
  const auto res = double_slit_scenario(c, p);

  SeriesWriter sw(r.dir / "fields" / "psi", c.screen_time / static_cast<double>(c.n_snapshots - 1),
                  "amplitude_split_operator", series_params(r), p.mass);
  for (const auto& s : res.snapshots) sw.add(s, p.hbar);
  sw.finish();
  write_trajectories(r.dir / "trajectories" / "bohm.csv", res.trajectories);
  write_screen_histogram(r.dir / "screen_histogram.csv", res.screen);

  const auto& h = res.screen;
  double total = 0.0;
  for (double v : h.count) total += v;
  const double width = h.bin_center.size() > 1 ? h.bin_center[1] - h.bin_center[0] : 1.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < h.bin_center.size(); ++i)
    rows.push_back({h.bin_center[i], h.count[i], total > 0.0 ? h.count[i] / (total * width) : 0.0});
  r.table("screen_histogram", {"bin_center", "count", "density"}, rows);
  const auto& q = res.q_fields.back();
  const auto& g = res.snapshots.back().grid();
  std::vector<std::vector<double>> qrows;
  for (std::size_t j = 0; j < g.size(); ++j) qrows.push_back({g.point(j), q.q_statistical[j], q.v_eff[j]});
  r.table("statistical_potential", {"x", "q", "v_eff"}, qrows);

  std::size_t flagged = 0;
  for (auto f : res.trajectories.flagged) flagged += f;
  r.report.at_most("chi2_per_dof", h.chi2_per_dof, r.tol("chi2_per_dof"));
  r.report.within("fringe_spacing", res.fringe_spacing, res.predicted_spacing,
                  r.tol("fringe_relative") * res.predicted_spacing);
  r.report.at_most("crossings", static_cast<double>(res.crossings), 0.0);
  r.observables["chi2_per_dof"] = h.chi2_per_dof;
  r.observables["fringe_spacing"] = res.fringe_spacing;
  r.observables["predicted_spacing"] = res.predicted_spacing;
  r.observables["axis_crossings"] = res.axis_crossings;
  r.observables["flagged"] = flagged;
}

double fitted_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

void pauli(Run& r) {
  const auto& p = r.cfg.physics;
  const auto v = potential_from(r.section("potential"));
  const auto g = grid_from(r);
  const double dt = r.num("time", "dt");
  const auto hj = r.section("setup").at("field");
  const Vec3 h0{hj[0].get<double>(), hj[1].get<double>(), hj[2].get<double>()};
  const auto sj = r.section("setup").at("spinor");
  std::array<cplx, 2> chi{cplx(sj[0].get<double>(), sj[1].get<double>()), cplx(sj[2].get<double>(), sj[3].get<double>())};
  const double cn = std::sqrt(std::norm(chi[0]) + std::norm(chi[1]));
  if (!(cn > 0.0)) throw SchemaError("/setup/spinor", "spinor must be non-zero");
  for (auto& c : chi) c /= cn;

  const auto algebra = make_spin_algebra(p);
  r.report.at_most("spin_commutator", spin_commutator_check(algebra, CommutatorForm::scaled), r.tol("commutator"));

  const auto ground = relaxed_eigenbasis(g, v, p, 1).states()[0];
  auto rho = make_spin_density(ground, chi, p.hbar);
  const auto field = MagneticFieldSpec::uniform(h0);
  const double hn = std::sqrt(h0[0] * h0[0] + h0[1] * h0[1] + h0[2] * h0[2]);
  // frame perpendicular to the field
  Vec3 e1{1, 0, 0}, e2{0, 1, 0};
  if (hn > 0.0) {
    const Vec3 u{h0[0] / hn, h0[1] / hn, h0[2] / hn};
    const Vec3 a = std::abs(u[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const double d = a[0] * u[0] + a[1] * u[1] + a[2] * u[2];
    e1 = {a[0] - d * u[0], a[1] - d * u[1], a[2] - d * u[2]};
    const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (auto& x : e1) x /= n1;
    e2 = {u[1] * e1[2] - u[2] * e1[1], u[2] * e1[0] - u[0] * e1[2], u[0] * e1[1] - u[1] * e1[0]};
  }
  SeriesWriter sw(r.dir / "fields" / "spin_density", dt, "pauli_strang", series_params(r), p.mass);
  std::vector<std::vector<double>> rows;
  std::vector<double> ts, phase;
  double trace_drift = 0.0, herm = 0.0, perp0 = -1.0, drift = 0.0, offset = 0.0, last = 0.0;
  Vec3 m0{};
  for (double t : snapshot_times(r)) {
    if (t > 0.0) rho = evolve_pauli(rho, v, field, p, t, dt);
    const auto m = spin_expectation(rho, algebra);
    if (ts.empty()) m0 = m;
    for (int i = 0; i < 3; ++i) drift = std::max(drift, std::abs(m[i] - m0[i]));
    const double c1 = m[0] * e1[0] + m[1] * e1[1] + m[2] * e1[2];
    const double c2 = m[0] * e2[0] + m[1] * e2[1] + m[2] * e2[2];
    if (perp0 < 0.0) perp0 = std::hypot(c1, c2);
    double a = std::atan2(c2, c1);
    if (!ts.empty()) {
      while (a + offset - last > M_PI) offset -= 2 * M_PI;
      while (a + offset - last < -M_PI) offset += 2 * M_PI;
    }
    last = a + offset;
    ts.push_back(t);
    phase.push_back(last);
    trace_drift = std::max(trace_drift, std::abs(rho.trace() - 1.0));
    herm = std::max(herm, rho.hermiticity_defect());
    rows.push_back({t, m[0], m[1], m[2]});
    sw.add(rho);
  }
  sw.finish();
  r.table("spin_vs_time", {"t", "mx", "my", "mz"}, rows);
  const double expected = algebra.gyromagnetic * hn;
  if (hn > 0.0 && perp0 > 1e-8) {
    const double rate = std::abs(fitted_slope(ts, phase));
    r.report.within("larmor_rate", rate, expected, r.tol("larmor_relative") * expected);
    r.observables["larmor_rate"] = rate;
  } else {
    r.report.within("spin_drift", drift, 0.0, 1e-9);
  }
  r.observables["larmor_expected"] = expected;
  r.report.at_most("trace_drift", trace_drift, r.tol("trace"));
  r.report.at_most("hermiticity", herm, r.tol("trace"));

  // with H = 0 every block is the scalar solution times chi chi^dagger
  const auto psi = make_gaussian_amplitude(g, 0.5, 0.8, 1.0, p.hbar);
  const auto out = evolve_pauli(make_spin_density(psi, chi, p.hbar), v, MagneticFieldSpec::uniform({}), p, 1.0, dt);
  const auto scalar = evolve_density_first_eq(densify(psi, p.hbar), v, p, 1.0, dt);
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const cplx wgt = chi[a] * std::conj(chi[b]);
      const auto& pl = out.planes()[static_cast<std::size_t>(2 * a + b)];
      for (std::size_t k = 0; k < pl.size(); ++k) worst = std::max(worst, std::abs(pl[k] - wgt * scalar.values()[k]));
    }
  r.report.within("zero_field_reduction", worst, 0.0, r.tol("reduction"));
}

double species_sum(const std::vector<double>& v, const PhaseSpaceGrid& g, int power, double mass) {
  double s = 0.0;
  for (std::size_t ix = 0; ix < g.nx(); ++ix)
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
      const double pp = g.p_axis().point(ip);
      const double w = power == 0 ? 1.0 : power == 1 ? pp : pp * pp / (2.0 * mass);
      s += w * v[ix * g.np() + ip];
    }
  return s * g.x_axis().spacing() * g.p_axis().spacing();
}

void observer(Run& r) {
  const auto& p = r.cfg.physics;
  const auto v = potential_from(r.section("potential"));
  const auto ps = PhaseSpaceGrid::dual(grid_from(r), p.hbar);
  const double dt = r.num("time", "dt");
  const double m1 = p.mass, m2 = r.num("setup", "mass2");
  auto species = [&](const char* key) {
    const auto& s = r.section("setup").at(key);
    return make_gaussian_phase_space(ps, s.at("x0").get<double>(), s.at("p0").get<double>(),
                                     s.at("sigma_x").get<double>(), s.at("sigma_p").get<double>());
  };
  const CoupledEnsembles ens0{species("species1"), species("species2")};
  const auto kernel = CollisionKernel::build(ps.p_axis(), ps.p_axis(), m1, m2, r.num("setup", "strength"));
  const auto off = CollisionKernel::build(ps.p_axis(), ps.p_axis(), m1, m2, 0.0);
  write_json(r.dir / "kernel.json", kernel.to_json());

  const auto d1 = collision_term(ens0, kernel, 1);
  const auto d2 = collision_term(ens0, kernel, 2);
  r.report.at_most("step_number_species1", std::abs(species_sum(d1, ps, 0, m1)), r.tol("number"));
  r.report.at_most("step_number_species2", std::abs(species_sum(d2, ps, 0, m2)), r.tol("number"));
  r.report.at_most("step_momentum", std::abs(species_sum(d1, ps, 1, m1) + species_sum(d2, ps, 1, m2)),
                   r.tol("momentum"));
  r.report.at_most("step_energy", std::abs(species_sum(d1, ps, 2, m1) + species_sum(d2, ps, 2, m2)), r.tol("energy"));

  const double t_final = r.num("time", "t_final");
  const auto free_run = evolve_coupled(ens0, v, v, off, p, t_final, dt);
  PhysicsParams p2 = p;
  p2.mass = m2;
  const auto l1 = evolve_liouville(ens0.f1, v, p, t_final, dt);
  const auto l2 = evolve_liouville(ens0.f2, v, p2, t_final, dt);
  double degenerate = 0.0;
  for (std::size_t i = 0; i < l1.values().size(); ++i) {
    degenerate = std::max(degenerate, std::abs(free_run.f1.values()[i] - l1.values()[i]));
    degenerate = std::max(degenerate, std::abs(free_run.f2.values()[i] - l2.values()[i]));
  }
  r.report.within("zero_strength_degeneracy", degenerate, 0.0, 0.0);

  const auto idx = static_cast<std::size_t>(static_cast<long long>(ps.nx() / 2) +
                                            std::llround(r.num("setup", "probe_dx") / ps.x_axis().spacing()));
  if (idx >= ps.nx()) throw SchemaError("/setup/probe_dx", "probe offset outside the dx axis");
  const double base = offdiagonal_norm(wigner_moyal_forward(ens0.f1), idx);
  SeriesWriter s1(r.dir / "fields" / "species1", dt, "coupled_strang", series_params(r), m1);
  SeriesWriter s2(r.dir / "fields" / "species2", dt, "coupled_strang", series_params(r), m2);
  auto on = ens0, nocoll = ens0;
  std::vector<std::vector<double>> rows, moments;
  double rc = 1.0, rf = 1.0;
  for (double t : snapshot_times(r)) {
    if (t > 0.0) {
      on = evolve_coupled(on, v, v, kernel, p, t, dt);
      nocoll = evolve_coupled(nocoll, v, v, off, p, t, dt);
    }
    rc = offdiagonal_norm(wigner_moyal_forward(on.f1), idx) / base;
    rf = offdiagonal_norm(wigner_moyal_forward(nocoll.f1), idx) / base;
    rows.push_back({t, rc, rf});
    const auto a = species_moments(on.f1, m1), b = species_moments(on.f2, m2);
    moments.push_back({t, a.number, b.number, a.momentum + b.momentum, a.kinetic_energy + b.kinetic_energy});
    s1.add(on.f1);
    s2.add(on.f2);
  }
  s1.finish();
  s2.finish();
  r.table("offdiagonal_vs_time", {"t", "ratio_coupled", "ratio_free"}, rows);
  r.table("species_moments_vs_time", {"t", "number1", "number2", "momentum", "kinetic_energy"}, moments);
  r.report.below("offdiagonal_ratio", rc, rf);
  r.observables["offdiagonal_ratio_coupled"] = rc;
  r.observables["offdiagonal_ratio_free"] = rf;
  r.observables["entropy_final"] = coupled_entropy(on);
}

void mixture(Run& r) {
  const auto& p = r.cfg.physics;
  const auto v = potential_from(r.section("potential"));
  const auto g = grid_from(r);
  const auto& setup = r.section("setup");
  const auto basis = relaxed_eigenbasis(g, v, p, setup.at("basis_size").get<std::size_t>());
  const auto levels = setup.at("levels").get<std::vector<std::size_t>>();
  const auto weights = setup.at("weights").get<std::vector<double>>();
  MixtureSpec spec;
  std::map<std::size_t, double> by_level;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] >= basis.size())
      throw SchemaError("/setup/levels/" + std::to_string(i), "level outside the basis");
    spec.components.push_back({weights[i], basis.states()[levels[i]]});
    by_level[levels[i]] += weights[i];
  }
  const auto dm = density_matrix_in_basis(spec, basis);
  const auto rho = mix(spec, p.hbar);
  if (dm.size() <= 64) write_json(r.dir / "density_matrix.json", dm.to_json());
  write_field(r.dir / "fields" / "mixture.wmf", rho, p.mass);

  for (const auto& o : setup.at("observables")) {
    const auto text = o.get<std::string>();
    const auto expr = parse_observable(text);
    const double tr = trace_expectation(dm, reduce_to_amplitude_operator(expr, p), basis);
    const double gr = expect_density(compile_density_operator(expr, p), rho);
    r.report.within("trace/" + text, tr, gr, r.tol("trace") * std::max(1.0, std::abs(gr)));
    r.observables["trace/" + text] = tr;
  }
  double expected_purity = 0.0;
  for (const auto& [lvl, w] : by_level) expected_purity += w * w;
  r.report.within("purity", dm.purity(), expected_purity, r.tol("purity"));
  r.observables["purity"] = dm.purity();
  if (v.kind == PotentialSpec::Kind::harmonic) {
    double x2 = 0.0;
    for (const auto& [lvl, w] : by_level)
      x2 += w * (static_cast<double>(lvl) + 0.5) * p.hbar / (p.mass * v.omega);
    const double tr = trace_expectation(dm, reduce_to_amplitude_operator(parse_observable("x^2"), p), basis);
    r.report.within("x2_levels", tr, x2, r.tol("trace"));
  }

  const double thr = r.tol("factorization");
  const auto fmix = factorization_test(rho);
  if (expected_purity >= 1.0 - 1e-12)
    r.report.at_least("factorization_mixture", fmix.score, thr);
  else
    r.report.below("factorization_mixture", fmix.score, thr);
  r.report.at_least("factorization_pure", factorization_test(densify(basis.states()[0], p.hbar)).score, thr);
  const auto ps = PhaseSpaceGrid::dual(g, p.hbar);
  const auto df = wigner_moyal_forward(make_dispersion_free({0.0, 0.0, 0.0}, ps));
  r.report.below("factorization_dispersion_free", factorization_test(df).score, thr);
  r.observables["factorization_mixture"] = fmix.score;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dm.matrix(), Eigen::EigenvaluesOnly);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    rows.push_back({static_cast<double>(i), es.eigenvalues()(es.eigenvalues().size() - 1 - i)});
  r.table("density_matrix_spectrum", {"index", "eigenvalue"}, rows);
}

void prepare_directory(const fs::path& dir) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw InputError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!fs::exists(dir / "manifest.json"))
        throw InputError(dir.string() + " is not empty and does not hold a previous run");
      for (const auto& e : fs::directory_iterator(dir)) fs::remove_all(e.path());
    }
  }
  fs::create_directories(dir);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config) {
  config.physics.validate();
  Run r{config, config.output};
  prepare_directory(r.dir);
  write_json(r.dir / "config.json", config.input);
  switch (config.scenario) {
    case ScenarioKind::classical_quantum_bridge: bridge(r); break;
    case ScenarioKind::dispersion_free_newton: newton(r); break;
    case ScenarioKind::operator_roundtrip: roundtrip(r); break;
    case ScenarioKind::uncertainty_survey: survey(r); break;
    case ScenarioKind::bohm_double_slit: double_slit(r); break;
    case ScenarioKind::pauli_precession: pauli(r); break;
    case ScenarioKind::observer_coupling: observer(r); break;
    case ScenarioKind::mixture_trace: mixture(r); break;
  }
  write_json(r.dir / "report.json", r.report.to_json());
  write_json(r.dir / "observables.json", r.observables);
  write_json(r.dir / "quantities.json", r.quantities);
  {
    std::ofstream s(r.dir / "summary.txt");
    s << "scenario: " << scenario_name(config.scenario) << '\n' << r.report.summary();
  }
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(r.dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), r.dir).generic_string());
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  write_json(r.dir / "manifest.json", {{"library_version", kLibraryVersion},
                                        {"scenario", scenario_name(config.scenario)},
                                        {"config", config.input},
                                        {"resolved_config", config.resolved},
                                        {"created", utc_now()},
                                        {"artifacts", files}});
  return {r.dir, r.report};
}

}  // namespace wmb
