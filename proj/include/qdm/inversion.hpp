#ifndef QDM_INVERSION_HPP
#define QDM_INVERSION_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdm/raster.hpp"
#include "qdm/sensor.hpp"

namespace qdm {

struct InversionOptions {
  int pad_factor = 2;             // padded linear size = pad_factor * data size
  double window_cutoff = 2.0e-6;  // Hanning cutoff wavelength lambda_c, m
  std::string window_kind = "hanning";  // "hanning" | "none"
  int taper_px = 8;               // cosine roll-off width at the data edge
  double tikhonov = 0.0;          // optional regularization epsilon (0 = off)
};

/// Sheet current density maps recovered from one B_NV image.
struct CurrentDensityMap {
  ScalarRaster kx;    // A/m
  ScalarRaster ky;    // A/m
  ScalarRaster kmag;  // A/m, sqrt(kx^2 + ky^2) pixelwise
  double standoff_used = 0.0;
  InversionOptions window;
  Grid2D source_grid;
  // diagnostics
  double max_continuity_residual = 0.0;  // max |k.K| / (k |K|) over retained modes
  double singular_mode_fraction = 0.0;
  bool resolution_warning = false;       // pitch > h/2
};

/// Fourier-space inversion of Biot-Savart for a 2D sheet current from a
/// single NV-axis field projection: taper + zero-pad, FFT, solve the
/// NV-projected sheet-current kernel under the continuity constraint
/// kx*Kx + ky*Ky = 0, window-filter, inverse FFT, crop. The k = 0 mode
/// carries no current information and is zeroed; integrate_current restores
/// it per-transect via its flank baseline.
CurrentDensityMap invert_bnv(const ScalarRaster& b_sample,
                             const NvSensorParams& params, double h,
                             const InversionOptions& opts = {});

struct Transect {
  Eigen::Vector2d p0;
  Eigen::Vector2d p1;
};

struct TransectCurrent {
  double current = 0.0;       // A, signed along the right-hand normal of p1-p0
  double mean_density = 0.0;  // A/m over the 10%-of-max support, baseline removed
  double std = 0.0;           // A, spread over the transect band
  double baseline = 0.0;      // A/m, flank offset subtracted before integration
};

/// Line integral of K . n across a transect (bilinear sampling at pitch/2),
/// after removing the per-transect flank baseline (median of the outer
/// quarter of samples at each end, averaged). Repeated over `band_count`
/// parallel transects spaced `band_spacing` apart; reports mean and std.
/// The transect must be local (a few conductor widths), not full-field.
TransectCurrent integrate_current(const CurrentDensityMap& kmap,
                                  const Transect& transect, int band_count = 33,
                                  double band_spacing = 0.0 /* 0 = pitch */);

struct Glyph {
  Eigen::Vector2d position;  // m
  Eigen::Vector2d vector;    // (kx, ky), A/m
};

/// Arrow list for quiver-style rendering: pixels on the stride lattice with
/// |K| above threshold.
std::vector<Glyph> vector_glyphs(const CurrentDensityMap& kmap, double threshold,
                                 int stride);

/// Bilinear sample of a raster at a physical point (clamped at borders).
double sample_bilinear(const ScalarRaster& r, const Eigen::Vector2d& p);

}  // namespace qdm

#endif
