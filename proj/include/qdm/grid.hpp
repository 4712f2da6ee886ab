#ifndef QDM_GRID_HPP
#define QDM_GRID_HPP

#include <Eigen/Dense>

#include "qdm/errors.hpp"

namespace qdm {

/// Uniform 2D pixel grid with square pixels. origin is the physical
/// position (meters) of the center of pixel (0,0); pixel (i,j) sits at
/// origin + (i*pitch, j*pitch).
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double pitch = 0.0;                       // meters per pixel
  Eigen::Vector2d origin{0.0, 0.0};         // meters

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double pitch_, Eigen::Vector2d origin_ = {0.0, 0.0})
      : nx(nx_), ny(ny_), pitch(pitch_), origin(std::move(origin_)) {
    validate();
  }

  void validate() const {
    require(nx >= 1 && ny >= 1, "Grid2D: nx and ny must be >= 1");
    require(pitch > 0.0 && std::isfinite(pitch), "Grid2D: pitch must be positive");
    require(origin.allFinite(), "Grid2D: origin must be finite");
  }

  long npixels() const { return static_cast<long>(nx) * ny; }

  Eigen::Vector2d point_at(int ix, int iy) const {
    return origin + pitch * Eigen::Vector2d(ix, iy);
  }

  /// Fractional pixel index of a physical point (inverse of point_at).
  Eigen::Vector2d index_of(const Eigen::Vector2d& p) const {
    return (p - origin) / pitch;
  }

  bool same_as(const Grid2D& o, double tol = 0.0) const {
    return nx == o.nx && ny == o.ny && std::abs(pitch - o.pitch) <= tol &&
           (origin - o.origin).cwiseAbs().maxCoeff() <= tol;
  }

  /// Grid centered on (0,0): origin chosen so the pixel lattice is symmetric.
  static Grid2D centered(int nx, int ny, double pitch) {
    return Grid2D(nx, ny, pitch,
                  {-0.5 * (nx - 1) * pitch, -0.5 * (ny - 1) * pitch});
  }
};

}  // namespace qdm

#endif
