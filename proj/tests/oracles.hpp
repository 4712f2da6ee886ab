// Test-only brute-force field oracles, independent of the analytic formulas
// and quadrature code they check.
#ifndef QDM_TESTS_ORACLES_HPP
#define QDM_TESTS_ORACLES_HPP

#include <cmath>

#include <Eigen/Dense>

#include "qdm/geometry.hpp"

namespace qdm::oracles {

struct FieldXZ {
  double bx;
  double bz;
};

/// Strip field by splitting the sheet into n infinite straight filaments
/// (midpoint rule across the width), each with field mu0 I_f / (2 pi r).
/// Local frame: current along +y, x across the strip, observer a vertical
/// distance d below the sheet.
inline FieldXZ strip_filaments(double current, double width, double x, double d,
                               int n = 10000) {
  const double i_f = current / n;
  double bx = 0.0, bz = 0.0;
  for (int j = 0; j < n; ++j) {
    const double xj = (-0.5 + (j + 0.5) / n) * width;
    const double dx = x - xj;
    const double r2 = d * d + dx * dx;
    // infinite wire along +y at (xj, 0), observer at (x, -d):
    // B = -mu0 I /(2 pi r^2) * (d, 0, dx)
    bx += -kMu0 * i_f / (2.0 * M_PI * r2) * d;
    bz += -kMu0 * i_f / (2.0 * M_PI * r2) * dx;
  }
  return {bx, bz};
}

/// Field of a finite straight segment by dense midpoint quadrature of the
/// Biot-Savart line integral (no closed form used).
inline Eigen::Vector3d segment_quadrature(const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, double current,
                                          const Eigen::Vector3d& p, int n = 20000) {
  const Eigen::Vector3d dl = (b - a) / n;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d mid = a + (i + 0.5) * dl;
    const Eigen::Vector3d r = p - mid;
    acc += dl.cross(r) / std::pow(r.norm(), 3.0);
  }
  return kMu0 * current / (4.0 * M_PI) * acc;
}

}  // namespace qdm::oracles

#endif
