#ifndef QDM_STANDOFF_HPP
#define QDM_STANDOFF_HPP

#include <Eigen/Dense>

#include "qdm/geometry.hpp"
#include "qdm/sensor.hpp"

namespace qdm {

struct TransectFitResult {
  double h = 0.0;              // stand-off, m
  double current = 0.0;        // A (fitted, or the fixed input)
  double center_offset = 0.0;  // x0, m
  double residual_rms = 0.0;   // tesla
  Eigen::VectorXd covariance_diag;  // var(h), var(x0) [, var(I)] in physical units
  bool converged = false;      // false when h is unidentifiable (covariance blows up)
  int iterations = 0;
};

struct StandoffFitOptions {
  int max_iterations = 500;
  int quadrature_n = 33;  // same Simpson rule as the forward model
};

/// Least-squares estimate of the stand-off h (and optionally the current)
/// from a measured B'_NV transect across a strip: Levenberg-Marquardt on the
/// layer-averaged analytic strip model, h fit in log-space, with a nuisance
/// center offset x0. x is the signed distance along the strip normal.
/// Throws when LM exhausts max_iterations without meeting a tolerance.
TransectFitResult fit_standoff(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& b_nv,
                               const StripGeometry& strip,
                               const NvSensorParams& params, bool fit_current,
                               const StandoffFitOptions& opts = {});

/// The transect model itself: layer-averaged NV projection of the strip field
/// at lateral offset x (exposed for tests and synthetic transect generation).
double transect_model(double x, const StripGeometry& strip,
                      const NvSensorParams& params, int quadrature_n = 33);

}  // namespace qdm

#endif
