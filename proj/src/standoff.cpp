#include "qdm/standoff.hpp"

#include <cmath>
#include <sstream>

#include "qdm/forward_model.hpp"
#include "qdm/levmar.hpp"
#include "qdm/quadrature.hpp"

namespace qdm {

double transect_model(double x, const StripGeometry& strip,
                      const NvSensorParams& params, int quadrature_n) {
  const Eigen::Vector3d axis = params.axis();
  auto bnv_at = [&](double xx, double l) {
    const FieldSample f = strip_field(strip, xx, l);
    return f.bx * axis.x() + f.by * axis.y() + f.bz * axis.z();
  };
  if (params.h_nv == 0.0) return bnv_at(x, 0.0);
  const auto avg = layer_average(bnv_at, params.h_nv, quadrature_n);
  return avg(x);
}

TransectFitResult fit_standoff(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& b_nv,
                               const StripGeometry& strip_in,
                               const NvSensorParams& params, bool fit_current,
                               const StandoffFitOptions& opts) {
  params.validate();
  const int n = static_cast<int>(x.size());
  require(b_nv.size() == n, "fit_standoff: x and b_nv length mismatch");
  require(n >= 10, "fit_standoff: need at least 10 samples");
  require(x.allFinite() && b_nv.allFinite(), "fit_standoff: samples must be finite");
  const double span = x.maxCoeff() - x.minCoeff();
  require(span >= 2.0 * strip_in.width,
          "fit_standoff: transect must span at least 2 strip widths");

  const int np = fit_current ? 3 : 2;

  // initial guesses: h = w/4; x0 at the extremum; I from the wide-strip limit
  int ipeak = 0;
  b_nv.cwiseAbs().maxCoeff(&ipeak);
  const double b_peak = b_nv.cwiseAbs().maxCoeff();
  double i0 = strip_in.current;
  if (fit_current) {
    i0 = 2.0 * strip_in.width * b_peak / kMu0;
    if (i0 == 0.0) i0 = 0.0;  // zero transect: current unidentifiable
  }

  auto model_at = [&](double log_h, double x0, double cur, int i) {
    StripGeometry s = strip_in;
    s.standoff = std::exp(log_h);
    s.current = cur;
    return transect_model(x[i] - x0, s, params, opts.quadrature_n);
  };

  auto residuals_for = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) {
    const double cur = fit_current ? q[2] : strip_in.current;
    for (int i = 0; i < n; ++i) r[i] = model_at(q[0], q[1], cur, i) - b_nv[i];
  };

  auto residuals = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r,
                       Eigen::MatrixXd* J) {
    residuals_for(q, r);
    if (!J) return;
    // forward-difference Jacobian; steps scaled per parameter
    Eigen::VectorXd r1(n);
    for (int k = 0; k < np; ++k) {
      Eigen::VectorXd qk = q;
      const double step = (k == 1) ? std::max(1e-9, 1e-6 * strip_in.width)
                                   : std::max(1e-8, 1e-7 * std::abs(q[k]));
      qk[k] += step;
      residuals_for(qk, r1);
      J->col(k) = (r1 - r) / step;
    }
  };

  Eigen::VectorXd q0(np);
  q0[0] = std::log(std::max(1e-9, 0.25 * strip_in.width));
  q0[1] = b_peak > 0.0 ? x[ipeak] : 0.0;
  if (fit_current) q0[2] = std::max(i0, 1e-12);

  // the wide-strip relation leaves the current sign ambiguous
  if (fit_current && i0 != 0.0) {
    Eigen::VectorXd rp(n), rm(n);
    residuals_for(q0, rp);
    Eigen::VectorXd qn = q0;
    qn[2] = -q0[2];
    residuals_for(qn, rm);
    if (rm.squaredNorm() < rp.squaredNorm()) q0 = qn;
  }

  LevMarOptions lm;
  lm.max_iterations = opts.max_iterations;
  const LevMarResult res = levmar_solve(residuals, q0, n, lm);

  TransectFitResult out;
  out.h = std::exp(res.params[0]);
  out.center_offset = res.params[1];
  out.current = fit_current ? res.params[2] : strip_in.current;
  out.residual_rms = std::sqrt(res.cost / n);
  out.iterations = res.iterations;

  if (!res.converged) {
    std::ostringstream msg;
    msg << "fit_standoff: no convergence after " << res.iterations
        << " iterations; last iterate h=" << out.h << " m, x0=" << out.center_offset
        << " m, I=" << out.current << " A, rms=" << out.residual_rms << " T";
    throw ValidationError(msg.str());
  }

  Eigen::VectorXd cov_q;
  if (levmar_covariance(res, n, cov_q)) {
    out.covariance_diag = cov_q;
    out.covariance_diag[0] *= out.h * out.h;  // var(log h) -> var(h)
    out.converged = true;
  } else {
    out.covariance_diag = Eigen::VectorXd::Constant(
        np, std::numeric_limits<double>::infinity());
    out.converged = false;  // unidentifiable (flat or degenerate objective)
  }
  return out;
}

}  // namespace qdm
