#include "wmbridge/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include "wmbridge/errors.hpp"

namespace wmb {

namespace {

nlohmann::json axis_json(const std::string& name, const Grid1D& g) {
  return {{"name", name}, {"count", g.size()}, {"spacing", g.spacing()}, {"origin", g.origin()}, {"length", g.length()}};
}

nlohmann::json make_sidecar(const std::string& kind, bool complex, std::vector<nlohmann::json> axes, double time,
                            double hbar, double mass) {
  nlohmann::json spacing = nlohmann::json::array(), origin = nlohmann::json::array();
  for (const auto& a : axes) {
    spacing.push_back(a.at("spacing"));
    origin.push_back(a.at("origin"));
  }
  return {{"kind", kind},       {"dtype", complex ? "complex128" : "float64"},
          {"axes", axes},       {"spacing", spacing},
          {"origin", origin},   {"time", time},
          {"hbar", hbar},       {"mass", mass},
          {"byte_order", "little"}};
}

void write_payload(const fs::path& path, const double* data, std::size_t count) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto bits = std::bit_cast<std::array<char, 8>>(data[i]);
      std::reverse(bits.begin(), bits.end());
      out.write(bits.data(), 8);
    }
  }
  if (!out) throw InputError("write failed for " + path.string());
}

void write_both(const fs::path& wmf, const nlohmann::json& sidecar, const double* data, std::size_t count) {
  write_payload(wmf, data, count);
  write_json(fs::path(wmf.string() + ".json"), sidecar);
}

Grid1D axis_from(const nlohmann::json& a) {
  return Grid1D(a.at("count").get<std::size_t>(), a.at("length").get<double>(), a.at("origin").get<double>());
}

std::vector<cplx> as_complex(const RawField& r, std::size_t offset, std::size_t count) {
  std::vector<cplx> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = cplx(r.data[2 * (offset + i)], r.data[2 * (offset + i) + 1]);
  return out;
}

void expect_kind(const RawField& r, const std::string& kind) {
  if (r.sidecar.at("kind") != kind)
    throw InputError("expected a " + kind + " field, found " + r.sidecar.at("kind").get<std::string>());
}

}  // namespace

std::vector<std::size_t> RawField::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : sidecar.at("axes")) s.push_back(a.at("count").get<std::size_t>());
  return s;
}

void write_field(const fs::path& wmf, const PhaseSpaceField& f, double mass) {
  const auto& g = f.grid();
  write_both(wmf, make_sidecar("phase_space", false, {axis_json("x", g.x_axis()), axis_json("p", g.p_axis())}, f.time(),
                               g.hbar(), mass),
             f.values().data(), f.values().size());
}

void write_field(const fs::path& wmf, const DensityField& rho, double mass) {
  write_both(wmf, make_sidecar("density", true, {axis_json("x", rho.grid_y()), axis_json("dx", rho.grid_dy())},
                               rho.time(), rho.hbar(), mass),
             reinterpret_cast<const double*>(rho.values().data()), 2 * rho.values().size());
}

void write_field(const fs::path& wmf, const Amplitude& psi, double hbar, double mass) {
  write_both(wmf, make_sidecar("amplitude", true, {axis_json("x", psi.grid())}, psi.time(), hbar, mass),
             reinterpret_cast<const double*>(psi.values().data()), 2 * psi.values().size());
}

void write_field(const fs::path& wmf, const SpinDensityField& rho, double mass) {
  const std::size_t n = rho.size();
  std::vector<cplx> all;
  all.reserve(4 * n * n);
  for (const auto& p : rho.planes()) all.insert(all.end(), p.begin(), p.end());
  nlohmann::json block = {{"name", "block"}, {"count", 4}, {"spacing", 1.0}, {"origin", 0.0}, {"length", 4.0}};
  const auto dy = Grid1D::centered(n, rho.grid_y().length());
  auto side = make_sidecar("spin_density", true, {block, axis_json("x", rho.grid_y()), axis_json("dx", dy)}, rho.time(),
                           rho.hbar(), mass);
  side["block_order"] = {"uu", "ud", "du", "dd"};
  write_both(wmf, side, reinterpret_cast<const double*>(all.data()), 2 * all.size());
}

RawField read_raw_field(const fs::path& wmf) {
  RawField r;
  r.sidecar = read_json(fs::path(wmf.string() + ".json"));
  std::size_t count = 1;
  for (auto s : r.shape()) count *= s;
  if (r.is_complex()) count *= 2;
  std::ifstream in(wmf, std::ios::binary);
  if (!in) throw InputError("cannot read " + wmf.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(double)) throw InputError(wmf.string() + ": payload size does not match sidecar");
  in.seekg(0);
  r.data.resize(count);
  in.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(bytes));
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : r.data) {
      auto bits = std::bit_cast<std::array<char, 8>>(v);
      std::reverse(bits.begin(), bits.end());
      v = std::bit_cast<double>(bits);
    }
  }
  return r;
}

PhaseSpaceField read_phase_space_field(const fs::path& wmf) {
  auto r = read_raw_field(wmf);
  expect_kind(r, "phase_space");
  const auto& ax = r.sidecar.at("axes");
  PhaseSpaceGrid g(axis_from(ax[0]), axis_from(ax[1]), r.sidecar.at("hbar").get<double>());
  return PhaseSpaceField(g, std::move(r.data), r.sidecar.at("time").get<double>());
}

DensityField read_density_field(const fs::path& wmf) {
  const auto r = read_raw_field(wmf);
  expect_kind(r, "density");
  const auto g = axis_from(r.sidecar.at("axes")[0]);
  return DensityField(g, as_complex(r, 0, g.size() * g.size()), r.sidecar.at("hbar").get<double>(),
                      r.sidecar.at("time").get<double>());
}

Amplitude read_amplitude(const fs::path& wmf) {
  const auto r = read_raw_field(wmf);
  expect_kind(r, "amplitude");
  const auto g = axis_from(r.sidecar.at("axes")[0]);
  return Amplitude(g, as_complex(r, 0, g.size()), r.sidecar.at("time").get<double>());
}

SpinDensityField read_spin_density(const fs::path& wmf) {
  const auto r = read_raw_field(wmf);
  expect_kind(r, "spin_density");
  const auto g = axis_from(r.sidecar.at("axes")[1]);
  const std::size_t nn = g.size() * g.size();
  std::array<std::vector<cplx>, 4> planes;
  for (std::size_t b = 0; b < 4; ++b) planes[b] = as_complex(r, b * nn, nn);
  return SpinDensityField(g, std::move(planes), r.sidecar.at("hbar").get<double>(), r.sidecar.at("time").get<double>());
}

SeriesWriter::SeriesWriter(fs::path dir, double dt, std::string solver, nlohmann::json parameters, double mass)
    : dir_(std::move(dir)), dt_(dt), solver_(std::move(solver)), parameters_(std::move(parameters)), mass_(mass) {
  fs::create_directories(dir_);
}

fs::path SeriesWriter::next_path() {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.wmf", files_.size());
  files_.emplace_back(name);
  return dir_ / name;
}

void SeriesWriter::finish() {
  write_json(dir_ / "series.json",
             {{"dt", dt_}, {"count", files_.size()}, {"solver", solver_}, {"parameters", parameters_}, {"files", files_}});
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw InputError("csv row width mismatch in " + path.string());
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

void write_trajectories(const fs::path& csv, const TrajectoryBundle& bundle) {
  std::vector<std::vector<double>> rows;
  rows.reserve(bundle.states.size());
  for (const auto& s : bundle.states) rows.push_back({s.t, s.x, s.p});
  write_csv(csv, {"t", "x", "p"}, rows);
  std::size_t flagged = 0;
  for (auto f : bundle.flagged) flagged += f;
  auto manifest_path = csv;
  manifest_path.replace_extension(".json");
  write_json(manifest_path, {{"file", csv.filename().string()},
                             {"kind", bundle.kind == TrajectoryBundle::Kind::bohmian ? "bohmian" : "newtonian"},
                             {"columns", {"t", "x", "p"}},
                             {"row_order", "trajectory-major"},
                             {"n_trajectories", bundle.n_trajectories},
                             {"n_times", bundle.n_times()},
                             {"flagged", flagged}});
}

void write_screen_histogram(const fs::path& csv, const ScreenHistogram& h) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < h.bin_center.size(); ++i) rows.push_back({h.bin_center[i], h.count[i], h.expected[i]});
  write_csv(csv, {"bin_center", "count", "expected"}, rows);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace wmb
