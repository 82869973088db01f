#include <algorithm>
#include <cmath>
#include <map>

#include "wmbridge/errors.hpp"
#include "wmbridge/io.hpp"
#include "wmbridge/scenario.hpp"

namespace wmb {

using nlohmann::json;

namespace {

json manifest_of(const fs::path& dir) {
  const auto m = dir / "manifest.json";
  if (!fs::exists(m)) throw IncompatibleRuns(dir.string() + " holds no run manifest");
  return read_json(m);
}

json compare_defaults() {
  return {{"fields", true},
          {"observables", true},
          {"tolerance", 1e-9},
          {"field_tolerance", 1e-9},
          {"require_same_physics", true}};
}

// Index map from each point of the coarse axis onto the fine axis.
std::vector<std::size_t> align_axis(const json& coarse, const json& fine) {
  const auto nc = coarse.at("count").get<std::size_t>();
  const auto nf = fine.at("count").get<std::size_t>();
  const double hc = coarse.at("spacing").get<double>(), hf = fine.at("spacing").get<double>();
  const double oc = coarse.at("origin").get<double>(), of = fine.at("origin").get<double>();
  const double lf = fine.at("length").get<double>();
  std::vector<std::size_t> map(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    double d = (oc + static_cast<double>(i) * hc - of) / hf;
    const double r = std::round(d);
    if (std::abs(d - r) > 1e-6) throw IncompatibleRuns("field grids do not share points");
    auto j = static_cast<long long>(r) % static_cast<long long>(nf);
    if (j < 0) j += static_cast<long long>(nf);
    // wrapping is only meaningful when both axes have the same period
    const bool same_period = std::abs(coarse.at("length").get<double>() - lf) <= 1e-9 * lf;
    if (!same_period && (r < 0 || r >= static_cast<double>(nf))) throw IncompatibleRuns("field grids do not overlap");
    map[i] = static_cast<std::size_t>(j);
  }
  return map;
}

struct FieldDiff {
  double l2 = 0.0;
  double linf = 0.0;
};

FieldDiff diff_fields(const RawField& a, const RawField& b) {
  if (a.sidecar.at("kind") != b.sidecar.at("kind") || a.sidecar.at("dtype") != b.sidecar.at("dtype"))
    throw IncompatibleRuns("field kinds differ");
  const auto& axa = a.sidecar.at("axes");
  const auto& axb = b.sidecar.at("axes");
  if (axa.size() != axb.size()) throw IncompatibleRuns("field ranks differ");
  // pick the coarse side axis by axis; it has to be the same run throughout
  int coarse_side = 0;
  for (std::size_t k = 0; k < axa.size(); ++k) {
    const auto na = axa[k].at("count").get<std::size_t>(), nb = axb[k].at("count").get<std::size_t>();
    const int side = na < nb ? 1 : (nb < na ? 2 : 0);
    if (side != 0 && coarse_side != 0 && side != coarse_side) throw IncompatibleRuns("field grids cross-refine");
    if (side != 0) coarse_side = side;
  }
  const RawField& c = coarse_side == 2 ? b : a;
  const RawField& f = coarse_side == 2 ? a : b;
  const auto& axc = c.sidecar.at("axes");
  const auto& axf = f.sidecar.at("axes");
  std::vector<std::vector<std::size_t>> maps;
  double cell = 1.0;
  for (std::size_t k = 0; k < axc.size(); ++k) {
    maps.push_back(align_axis(axc[k], axf[k]));
    cell *= axc[k].at("spacing").get<double>();
  }
  const std::size_t comps = c.is_complex() ? 2 : 1;
  const auto shape_c = c.shape();
  const auto shape_f = f.shape();
  std::size_t total = 1;
  for (auto s : shape_c) total *= s;
  FieldDiff d;
  double sum = 0.0;
  std::vector<std::size_t> idx(shape_c.size(), 0);
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t rem = lin;
    for (std::size_t k = shape_c.size(); k-- > 0;) {
      idx[k] = rem % shape_c[k];
      rem /= shape_c[k];
    }
    std::size_t fl = 0;
    for (std::size_t k = 0; k < shape_f.size(); ++k) fl = fl * shape_f[k] + maps[k][idx[k]];
    double e2 = 0.0;
    for (std::size_t q = 0; q < comps; ++q) {
      const double x = c.data[lin * comps + q] - f.data[fl * comps + q];
      e2 += x * x;
    }
    sum += e2;
    d.linf = std::max(d.linf, std::sqrt(e2));
  }
  d.l2 = std::sqrt(sum * cell);
  return d;
}

// series name -> sorted wmf files (relative to the run directory)
std::map<std::string, std::vector<std::string>> field_files(const fs::path& dir) {
  std::map<std::string, std::vector<std::string>> out;
  const auto root = dir / "fields";
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".wmf") continue;
    const auto rel = fs::relative(e.path(), root);
    const std::string series = rel.has_parent_path() ? rel.parent_path().generic_string() : rel.stem().string();
    out[series].push_back(fs::relative(e.path(), dir).generic_string());
  }
  for (auto& [k, v] : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace

ComparisonReport compare_runs(const fs::path& dir_a, const fs::path& dir_b, const json& metrics) {
  auto opts = compare_defaults();
  if (!metrics.is_object()) throw SchemaError("/", "metrics must be a JSON object");
  for (auto it = metrics.begin(); it != metrics.end(); ++it) {
    if (!opts.contains(it.key())) throw SchemaError("/" + it.key(), "unknown key");
    if (opts[it.key()].is_boolean() != it.value().is_boolean() || opts[it.key()].is_number() != it.value().is_number())
      throw SchemaError("/" + it.key(), "wrong type");
    opts[it.key()] = it.value();
  }
  const auto ma = manifest_of(dir_a);
  const auto mb = manifest_of(dir_b);
  if (ma.at("scenario") != mb.at("scenario"))
    throw IncompatibleRuns("scenarios differ: " + ma.at("scenario").get<std::string>() + " vs " +
                           mb.at("scenario").get<std::string>());
  if (opts["require_same_physics"].get<bool>()) {
    for (const char* key : {"physics", "potential"}) {
      const auto& ra = ma.at("resolved_config");
      const auto& rb = mb.at("resolved_config");
      if (ra.value(key, json()) != rb.value(key, json()))
        throw IncompatibleRuns(std::string("runs differ in /") + key);
    }
  }

  ComparisonReport report;
  if (opts["observables"].get<bool>()) {
    const auto oa = read_json(dir_a / "observables.json");
    const auto ob = read_json(dir_b / "observables.json");
    const double tol = opts["tolerance"].get<double>();
    for (auto it = oa.begin(); it != oa.end(); ++it)
      if (ob.contains(it.key()) && it.value().is_number() && ob.at(it.key()).is_number())
        report.within("observable/" + it.key(), it.value().get<double>(), ob.at(it.key()).get<double>(), tol);
  }
  if (opts["fields"].get<bool>()) {
    const auto fa = field_files(dir_a);
    const auto fb = field_files(dir_b);
    const double tol = opts["field_tolerance"].get<double>();
    for (const auto& [series, files] : fa) {
      const auto other = fb.find(series);
      if (other == fb.end()) continue;
      FieldDiff worst;
      const std::size_t n = std::min(files.size(), other->second.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto d = diff_fields(read_raw_field(dir_a / files[i]), read_raw_field(dir_b / other->second[i]));
        worst.l2 = std::max(worst.l2, d.l2);
        worst.linf = std::max(worst.linf, d.linf);
      }
      report.within("field_l2/" + series, worst.l2, 0.0, tol);
      report.within("field_linf/" + series, worst.linf, 0.0, tol);
    }
  }
  return report;
}

std::vector<std::string> available_quantities(const fs::path& run_dir) {
  const auto path = run_dir / "quantities.json";
  if (!fs::exists(path)) throw InputError(run_dir.string() + " holds no run outputs");
  std::vector<std::string> names;
  const auto q = read_json(path);
  for (auto it = q.begin(); it != q.end(); ++it) names.push_back(it.key());
  return names;
}

fs::path export_plot_data(const fs::path& run_dir, const std::string& quantity) {
  const auto names = available_quantities(run_dir);
  if (std::find(names.begin(), names.end(), quantity) == names.end()) throw MissingQuantity(quantity, names);
  const auto q = read_json(run_dir / "quantities.json").at(quantity);
  const auto out = run_dir / "exports" / (quantity + ".csv");
  write_csv(out, q.at("columns").get<std::vector<std::string>>(), q.at("rows").get<std::vector<std::vector<double>>>());
  return out;
}

}  // namespace wmb
