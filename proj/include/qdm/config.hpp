#ifndef QDM_CONFIG_HPP
#define QDM_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdm/geometry.hpp"
#include "qdm/grid.hpp"
#include "qdm/inversion.hpp"
#include "qdm/odmr.hpp"
#include "qdm/sensor.hpp"

namespace qdm {

struct TapConfig {
  std::string name;
  Transect transect;        // m
  int band_count = 33;
  double band_spacing = 0;  // m; 0 = one pixel
  double multiplier = 1.0;  // unit transistors feeding this conductor
};

struct CalibrationConfig {
  bool enabled = false;
  bool fit_current = false;
  std::string transect_csv;  // optional measured transect; empty = from fit output
  int strip_index = 0;       // geometry strip supplying w, I (and h truth in synth)
};

struct MirrorConfig {
  double wl_input = 16.0;
  double wl_unit = 16.0;
  int n_parallel = 15;
  double i_in = 50e-6;  // A
};

struct IoConfig {
  std::string out_dir = "out";
  std::string stack_minus = "stack_minus.qdms";
  std::string stack_plus = "stack_plus.qdms";
  std::string open_stack_minus;  // optional open-circuit stacks
  std::string open_stack_plus;
};

/// Full pipeline configuration (loaded from a JSON document with explicit
/// unit suffixes in key names; unknown keys are rejected).
struct PipelineConfig {
  uint64_t seed = 0;
  int threads = 1;
  NvSensorParams sensor;
  Grid2D grid = Grid2D::centered(256, 256, 260e-9);
  std::vector<StripGeometry> strips;
  std::vector<CurrentPath> paths;
  int forward_quadrature_n = 33;
  int path_filaments = 64;
  AcquisitionParams acquisition;
  ExtractOptions extract;
  InversionOptions inversion;
  std::optional<double> inversion_standoff;  // override, m
  CalibrationConfig calibration;
  MirrorConfig mirror;
  std::vector<TapConfig> taps;
  std::string references_csv;
  IoConfig io;

  void validate() const;
};

/// Parse and validate a config file. Checks that referenced input files
/// exist and that every key is known.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical content hash: stable under formatting/key order, changes with
/// any semantically meaningful field.
uint64_t config_hash(const std::filesystem::path& path);

}  // namespace qdm

#endif
