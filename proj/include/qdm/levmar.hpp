#ifndef QDM_LEVMAR_HPP
#define QDM_LEVMAR_HPP

#include <Eigen/Dense>

namespace qdm {

struct LevMarOptions {
  int max_iterations = 200;
  double ftol = 1e-12;        // relative cost decrease
  double xtol = 1e-12;        // relative step size
  double lambda0 = 1e-3;      // initial damping
  double lambda_up = 10.0;
  double lambda_down = 0.2;
  double lambda_max = 1e12;
};

struct LevMarResult {
  Eigen::VectorXd params;
  double cost = 0.0;          // sum of squared residuals
  int iterations = 0;
  bool converged = false;     // hit a tolerance (not the iteration cap)
  Eigen::MatrixXd jtj;        // J^T J at the solution (for covariance)
};

/// Damped-normal-equations Levenberg-Marquardt. `Residuals` fills r and J for
/// a parameter vector: residuals(p, r, J); minimizes |r|^2. Deterministic,
/// no internal state.
template <typename Residuals>
LevMarResult levmar_solve(Residuals&& residuals, Eigen::VectorXd p,
                          int n_residuals, const LevMarOptions& opts = {}) {
  const int np = static_cast<int>(p.size());
  Eigen::VectorXd r(n_residuals), r_try(n_residuals);
  Eigen::MatrixXd J(n_residuals, np);
  residuals(p, r, &J);
  double cost = r.squaredNorm();
  double lambda = opts.lambda0;

  LevMarResult out;
  out.params = p;
  out.cost = cost;
  out.jtj = J.transpose() * J;

  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    Eigen::MatrixXd damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    if (!step.allFinite()) {
      lambda *= opts.lambda_up;
      if (lambda > opts.lambda_max) break;
      continue;
    }
    const Eigen::VectorXd p_try = p + step;
    residuals(p_try, r_try, nullptr);
    const double cost_try = r_try.squaredNorm();
    if (cost_try < cost) {
      const double rel_drop = (cost - cost_try) / std::max(cost, 1e-300);
      const double rel_step = step.norm() / std::max(p.norm(), 1e-300);
      p = p_try;
      residuals(p, r, &J);
      cost = cost_try;
      lambda = std::max(lambda * opts.lambda_down, 1e-12);
      out.params = p;
      out.cost = cost;
      out.jtj = J.transpose() * J;
      if (rel_drop < opts.ftol || rel_step < opts.xtol) {
        out.converged = true;
        break;
      }
    } else {
      lambda *= opts.lambda_up;
      if (lambda > opts.lambda_max) {
        // cannot improve: stationary to within damping range
        out.converged = cost == 0.0 || g.lpNorm<Eigen::Infinity>() <
                                           1e-12 * std::max(1.0, cost);
        break;
      }
    }
  }
  return out;
}

/// Parameter covariance from the final J^T J: sigma^2 (J^T J)^-1 with
/// sigma^2 = cost / (n - p). Returns false when J^T J is ill-conditioned.
inline bool levmar_covariance(const LevMarResult& fit, int n_residuals,
                              Eigen::VectorXd& diag_out) {
  const int np = static_cast<int>(fit.params.size());
  if (n_residuals <= np) return false;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(fit.jtj);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return false;
  const double sigma2 = fit.cost / (n_residuals - np);
  diag_out = (lu.inverse() * sigma2).diagonal();
  return diag_out.allFinite() && (diag_out.array() >= 0.0).all();
}

}  // namespace qdm

#endif
