#ifndef QDM_HEATMAP_HPP
#define QDM_HEATMAP_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "qdm/inversion.hpp"
#include "qdm/raster.hpp"

namespace qdm {

struct HeatmapScale {
  double min = 0.0;
  double max = 0.0;
  std::string colormap = "diverging";  // "diverging" | "gray"
};

/// Symmetric diverging scale for signed fields, plain [min, max] otherwise.
HeatmapScale auto_scale(const ScalarRaster& r);

/// Render an 8-bit PPM image (pixel (0,0) bottom-left, y up) plus a sidecar
/// '<path>.txt' recording min/max/unit/colormap and the glyph count. Glyphs
/// are drawn as arrows scaled so the longest spans ~5% of the image width.
/// Returns the number of glyphs drawn.
int emit_heatmap(const ScalarRaster& raster, const HeatmapScale& scale,
                 const std::filesystem::path& path,
                 const std::vector<Glyph>& glyphs = {});

}  // namespace qdm

#endif
