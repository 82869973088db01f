#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wmbridge/bohm.hpp"
#include "wmbridge/classical.hpp"
#include "wmbridge/fields.hpp"
#include "wmbridge/spin.hpp"

namespace wmb {

namespace fs = std::filesystem;

/// Raw field payload: little-endian float64, complex values interleaved
/// re/im, row-major. The sidecar `<file>.json` carries
/// {kind, dtype, axes, spacing, origin, time, hbar, mass} (+ block_order
/// for spin fields).
struct RawField {
  nlohmann::json sidecar;
  std::vector<double> data;

  bool is_complex() const { return sidecar.at("dtype") == "complex128"; }
  std::vector<std::size_t> shape() const;
};

void write_field(const fs::path& wmf, const PhaseSpaceField& f, double mass);
void write_field(const fs::path& wmf, const DensityField& rho, double mass);
void write_field(const fs::path& wmf, const Amplitude& psi, double hbar, double mass);
void write_field(const fs::path& wmf, const SpinDensityField& rho, double mass);

/// Throws InputError on missing files or a payload that does not match the sidecar.
RawField read_raw_field(const fs::path& wmf);
PhaseSpaceField read_phase_space_field(const fs::path& wmf);
DensityField read_density_field(const fs::path& wmf);
Amplitude read_amplitude(const fs::path& wmf);
SpinDensityField read_spin_density(const fs::path& wmf);

/// Snapshot directory: 000000.wmf, 000001.wmf, ... and series.json
/// {dt, count, solver, parameters, files}. Snapshots are written as they
/// arrive; series.json is written by finish().
class SeriesWriter {
 public:
  SeriesWriter(fs::path dir, double dt, std::string solver, nlohmann::json parameters, double mass);

  template <class Field>
  void add(const Field& f) {
    write_field(next_path(), f, mass_);
  }
  void add(const Amplitude& psi, double hbar) { write_field(next_path(), psi, hbar, mass_); }
  void finish();
  std::size_t count() const { return files_.size(); }

 private:
  fs::path next_path();

  fs::path dir_;
  double dt_;
  std::string solver_;
  nlohmann::json parameters_;
  double mass_;
  std::vector<std::string> files_;
};

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// Plain CSV table with a header row.
void write_csv(const fs::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Columns t, x, p; rows trajectory-major. `<stem>.json` manifest beside it.
void write_trajectories(const fs::path& csv, const TrajectoryBundle& bundle);

/// Columns bin_center, count, expected.
void write_screen_histogram(const fs::path& csv, const ScreenHistogram& h);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace wmb
