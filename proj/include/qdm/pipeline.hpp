#ifndef QDM_PIPELINE_HPP
#define QDM_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "qdm/circuit.hpp"
#include "qdm/config.hpp"
#include "qdm/standoff.hpp"

namespace qdm {

inline constexpr const char* kVersion = "0.1.0";

/// Ground-truth sheet current density of a strip, edge coverage antialiased
/// so transect integrals reproduce I exactly.
CurrentDensityMap make_strip_k_map(const StripGeometry& strip, const Grid2D& grid);

/// Ground-truth sheet current density of a polyline ribbon (miter-joined).
CurrentDensityMap make_path_k_map(const CurrentPath& path, const Grid2D& grid);

/// Forward B'_NV sample-field map (tesla) of every conductor in the config.
ScalarRaster forward_sample_map(const PipelineConfig& c);

struct SynthResult {
  std::filesystem::path stack_minus, stack_plus;
  std::filesystem::path b_sample_true, b_total_true;
  std::filesystem::path k_true_kx, k_true_ky, k_true_kmag;
  double max_abs_b_sample = 0.0;  // tesla
};

/// synth: forward model -> total-field map -> both ODMR stacks + ground truth.
SynthResult run_synth(const PipelineConfig& c);

struct FitResult {
  ScalarRaster b_total;   // tesla
  ScalarRaster b_sample;  // tesla, bias removed
  long n_nonconverged = 0;
  long n_infilled = 0;
};

/// fit: read stacks, per-pixel extraction, bias subtraction (open-circuit
/// stacks when configured, uniform configured bias otherwise).
FitResult run_fit(const PipelineConfig& c);

struct CalibrationResult {
  TransectFitResult fit;
  std::filesystem::path transect_csv;
};

/// calibrate: fit the stand-off from a transect (from file, or cut through
/// the given sample-field map across the calibration strip).
CalibrationResult run_calibrate(const PipelineConfig& c,
                                const ScalarRaster* b_sample = nullptr);

/// invert: b_sample -> current density maps, written to the out dir.
CurrentDensityMap run_invert(const PipelineConfig& c, const ScalarRaster& b_sample,
                             double standoff);

struct ReportResult {
  std::vector<ComparisonRow> rows;
  std::map<std::string, TransectCurrent> tap_currents;
};

/// report: integrate every configured tap and build the comparison table.
ReportResult run_report(const PipelineConfig& c, const CurrentDensityMap& kmap);

/// analyze: fit -> subtract -> (calibrate) -> invert -> integrate -> report,
/// writing all products plus a run manifest. Returns the report.
ReportResult run_analyze(const PipelineConfig& c,
                         const std::filesystem::path& config_path);

/// Stand-off used by inversion: explicit override, else calibration result
/// (when enabled), else the first conductor's configured stand-off.
double inversion_standoff(const PipelineConfig& c,
                          const std::optional<double>& calibrated);

}  // namespace qdm

#endif
