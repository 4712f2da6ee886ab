#ifndef QDM_FORWARD_MODEL_HPP
#define QDM_FORWARD_MODEL_HPP

#include <Eigen/Dense>

#include "qdm/geometry.hpp"
#include "qdm/raster.hpp"
#include "qdm/sensor.hpp"

namespace qdm {

/// Oersted field vector (tesla) at one observation point.
struct FieldSample {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;
};

/// Analytic field of an infinite thin strip at signed lateral distance x
/// from the centerline (measured along strip.normal()) and depth l below the
/// diamond surface, so the vertical gap to the conductor plane is
/// l + strip.standoff. Components are returned in the sample frame (the
/// strip's local in-plane field is rotated by its axis). Sign convention:
/// current along +y gives Bz < 0 for x > 0 and Bx(0) = -mu0*I/(2w) in the
/// wide-strip limit.
FieldSample strip_field(const StripGeometry& strip, double x, double l);

/// strip_field evaluated over a whole grid at depth l.
void strip_field_map(const StripGeometry& strip, const Grid2D& grid, double l,
                     ScalarRaster& bx, ScalarRaster& by, ScalarRaster& bz);

/// Field of a polyline ribbon by finite-segment Biot-Savart, midpoint rule
/// across the width (n_width filaments). Ribbon segments are butt-joined
/// with a miter cap at interior vertices so filament currents are continuous
/// around corners. Accurate far (> 3w) from endpoints and corners.
void polyline_field_map(const CurrentPath& path, const Grid2D& grid, double l,
                        ScalarRaster& bx, ScalarRaster& by, ScalarRaster& bz,
                        int n_width = 64);

/// Single-point version of polyline_field_map (used by oracles and probes).
FieldSample polyline_field(const CurrentPath& path, const Eigen::Vector2d& p,
                           double l, int n_width = 64);

/// Projection onto the NV axis: B_NV = Bx sinT cosP + By sinT sinP + Bz cosT.
ScalarRaster project_nv(const ScalarRaster& bx, const ScalarRaster& by,
                        const ScalarRaster& bz, const NvSensorParams& params);

/// Layer-averaged, NV-projected field map of a strip: the full forward model
/// for one conductor (Simpson depth average over the NV layer).
ScalarRaster averaged_bnv_map(const StripGeometry& strip, const Grid2D& grid,
                              const NvSensorParams& params, int quadrature_n = 33);

/// Same for a polyline ribbon.
ScalarRaster averaged_bnv_map(const CurrentPath& path, const Grid2D& grid,
                              const NvSensorParams& params, int quadrature_n = 33,
                              int n_width = 64);

}  // namespace qdm

#endif
