#ifndef QDM_GEOMETRY_HPP
#define QDM_GEOMETRY_HPP

#include <vector>

#include <Eigen/Dense>

#include "qdm/errors.hpp"

namespace qdm {

/// Vacuum permeability, T·m/A.
constexpr double kMu0 = 4.0 * M_PI * 1e-7;

/// Thin conducting strip (2D sheet, thickness << width) carrying a DC
/// current. `axis` is the in-plane unit vector of current flow; the strip is
/// infinite along it. `standoff` is the conductor-to-diamond-surface gap.
struct StripGeometry {
  double width = 0.0;                 // m
  double standoff = 0.0;              // m
  double current = 0.0;               // A, positive along axis
  Eigen::Vector2d axis{0.0, 1.0};     // unit vector of current flow
  Eigen::Vector2d center{0.0, 0.0};   // a point on the centerline, m

  void validate() const {
    require(width > 0.0, "StripGeometry: width must be > 0");
    require(standoff >= 0.0, "StripGeometry: standoff must be >= 0");
    require(std::isfinite(current), "StripGeometry: current must be finite");
    require(std::abs(axis.norm() - 1.0) < 1e-9, "StripGeometry: axis must be unit length");
    require(center.allFinite(), "StripGeometry: center must be finite");
  }

  /// In-plane normal completing a right-handed frame (n, axis, z).
  Eigen::Vector2d normal() const { return {axis.y(), -axis.x()}; }
};

/// Polyline ribbon conductor: constant width and current, vertices in order
/// of current flow. Generalizes StripGeometry to corner geometries.
struct CurrentPath {
  std::vector<Eigen::Vector2d> vertices;  // m
  double width = 0.0;                     // m
  double current = 0.0;                   // A, positive in vertex order
  double standoff = 0.0;                  // m

  void validate() const {
    require(vertices.size() >= 2, "CurrentPath: need at least 2 vertices");
    require(width > 0.0, "CurrentPath: width must be > 0");
    require(standoff >= 0.0, "CurrentPath: standoff must be >= 0");
    require(std::isfinite(current), "CurrentPath: current must be finite");
    for (size_t i = 0; i + 1 < vertices.size(); ++i) {
      require((vertices[i + 1] - vertices[i]).norm() > 0.0,
              "CurrentPath: consecutive vertices must be distinct");
    }
  }
};

}  // namespace qdm

#endif
