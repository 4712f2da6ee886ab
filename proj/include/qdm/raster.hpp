#ifndef QDM_RASTER_HPP
#define QDM_RASTER_HPP

#include <string>

#include <Eigen/Dense>

#include "qdm/grid.hpp"

namespace qdm {

/// Physical unit tag carried by every raster. Mixing differently tagged
/// rasters without an explicit conversion is rejected.
enum class Unit { Tesla, AmperePerMeter, Megahertz, Dimensionless };

inline const char* unit_name(Unit u) {
  switch (u) {
    case Unit::Tesla: return "tesla";
    case Unit::AmperePerMeter: return "ampere_per_meter";
    case Unit::Megahertz: return "megahertz";
    case Unit::Dimensionless: return "dimensionless";
  }
  return "?";
}

Unit unit_from_name(const std::string& s);

/// 2D grid of physical scalars. values(ix, iy); the column-major (nx x ny)
/// storage makes the raw buffer identical to the canonical file order
/// (row-major, y outer, x inner).
struct ScalarRaster {
  Grid2D grid;
  Unit unit = Unit::Dimensionless;
  Eigen::ArrayXXd values;  // nx rows (x index), ny cols (y index)

  ScalarRaster() = default;
  ScalarRaster(Grid2D g, Unit u, Eigen::ArrayXXd v)
      : grid(std::move(g)), unit(u), values(std::move(v)) {
    validate();
  }

  void validate() const {
    grid.validate();
    require(values.rows() == grid.nx && values.cols() == grid.ny,
            "ScalarRaster: values shape does not match grid");
    require(values.allFinite(), "ScalarRaster: values must be finite");
  }

  double& at(int ix, int iy) { return values(ix, iy); }
  double at(int ix, int iy) const { return values(ix, iy); }
};

/// Uniformly filled raster.
inline ScalarRaster raster_new(const Grid2D& grid, Unit unit, double fill) {
  grid.validate();
  require(std::isfinite(fill), "raster_new: fill must be finite");
  return ScalarRaster(grid, unit, Eigen::ArrayXXd::Constant(grid.nx, grid.ny, fill));
}

inline void require_coregistered(const ScalarRaster& a, const ScalarRaster& b,
                                 const char* what) {
  require(a.grid.same_as(b.grid), std::string(what) + ": grid mismatch");
}

inline void require_same_unit(const ScalarRaster& a, const ScalarRaster& b,
                              const char* what) {
  require(a.unit == b.unit, std::string(what) + ": unit mismatch (" +
                                unit_name(a.unit) + " vs " + unit_name(b.unit) + ")");
}

/// Pixelwise a - b; units and grids must match.
inline ScalarRaster subtract(const ScalarRaster& a, const ScalarRaster& b) {
  require_coregistered(a, b, "subtract");
  require_same_unit(a, b, "subtract");
  return ScalarRaster(a.grid, a.unit, a.values - b.values);
}

inline ScalarRaster scaled(const ScalarRaster& a, double factor, Unit new_unit) {
  require(std::isfinite(factor), "scaled: factor must be finite");
  return ScalarRaster(a.grid, new_unit, a.values * factor);
}

}  // namespace qdm

#endif
