#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdm/rng.hpp"
#include "qdm/standoff.hpp"

using namespace qdm;

namespace {

NvSensorParams paper_sensor() { return NvSensorParams{}; }

StripGeometry strip_with(double w, double h, double cur) {
  StripGeometry s;
  s.width = w;
  s.standoff = h;
  s.current = cur;
  s.axis = {0.0, 1.0};
  return s;
}

// model-generated transect at the true stand-off
std::pair<Eigen::VectorXd, Eigen::VectorXd> make_transect(
    const StripGeometry& s, const NvSensorParams& p, int n, double half_span,
    double x0 = 0.0) {
  Eigen::VectorXd x(n), b(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -half_span + 2.0 * half_span * i / (n - 1);
    b[i] = transect_model(x[i] - x0, s, p);
  }
  return {x, b};
}

}  // namespace

TEST_CASE("noiseless transects recover the paper stand-offs within 1%") {
  const NvSensorParams p = paper_sensor();
  for (auto [w, h] : {std::pair{9.5e-6, 2.3e-6}, std::pair{15.5e-6, 2.8e-6}}) {
    const StripGeometry s = strip_with(w, h, 750e-6);
    const auto [x, b] = make_transect(s, p, 81, 2.5 * w);
    const TransectFitResult fit = fit_standoff(x, b, s, p, false);
    CHECK(fit.converged);
    CHECK(std::abs(fit.h - h) / h < 0.01);
    CHECK(std::abs(fit.center_offset) < 0.02 * w);
    CHECK(fit.residual_rms < 1e-9);
  }
}

TEST_CASE("identity: generating (h, I, x0) returns within 1e-3 relative") {
  const NvSensorParams p = paper_sensor();
  StripGeometry s = strip_with(9.5e-6, 2.3e-6, 640e-6);
  const double x0_true = 0.8e-6;
  const auto [x, b] = make_transect(s, p, 101, 24e-6, x0_true);
  const TransectFitResult fit = fit_standoff(x, b, s, p, true);
  CHECK(fit.converged);
  CHECK(std::abs(fit.h - s.standoff) / s.standoff < 1e-3);
  CHECK(std::abs(fit.current - s.current) / s.current < 1e-3);
  CHECK(std::abs(fit.center_offset - x0_true) < 1e-3 * s.width);
}

TEST_CASE("scale equivariance: a*b recovers the same h and a*I") {
  const NvSensorParams p = paper_sensor();
  const StripGeometry s = strip_with(9.5e-6, 2.3e-6, 750e-6);
  const auto [x, b] = make_transect(s, p, 81, 24e-6);
  const double a = 3.7;
  const Eigen::VectorXd b_scaled = a * b;

  const TransectFitResult f1 = fit_standoff(x, b, s, p, true);
  const TransectFitResult f2 = fit_standoff(x, b_scaled, s, p, true);
  CHECK(std::abs(f2.h - f1.h) / f1.h < 1e-6);
  CHECK(std::abs(f2.current - a * f1.current) / (a * f1.current) < 1e-6);
}

TEST_CASE("translation equivariance: shifting x shifts x0 and nothing else") {
  const NvSensorParams p = paper_sensor();
  const StripGeometry s = strip_with(9.5e-6, 2.3e-6, 750e-6);
  const auto [x, b] = make_transect(s, p, 81, 24e-6);
  const double delta = 2.3e-6;
  const Eigen::VectorXd x_shifted = x.array() + delta;

  const TransectFitResult f1 = fit_standoff(x, b, s, p, true);
  const TransectFitResult f2 = fit_standoff(x_shifted, b, s, p, true);
  CHECK(std::abs(f2.center_offset - (f1.center_offset + delta)) < 1e-6 * s.width);
  CHECK(std::abs(f2.h - f1.h) / f1.h < 1e-6);
  CHECK(std::abs(f2.current - f1.current) / std::abs(f1.current) < 1e-6);
}

TEST_CASE("Monte-Carlo: 1% field noise recovers h within 10% on >= 95% of 500 trials") {
  // w = 15.5 um, h = 2.8 um geometry; per-sample noise 1% of the peak field
  const NvSensorParams p = paper_sensor();
  const StripGeometry s = strip_with(15.5e-6, 2.8e-6, 300e-6);
  const auto [x, clean] = make_transect(s, p, 101, 2.2 * s.width);
  const double sigma = 0.01 * clean.cwiseAbs().maxCoeff();

  int hits = 0, attempts = 0;
  for (int trial = 0; trial < 500; ++trial) {
    GaussianStream rng = GaussianStream::substream(77, trial);
    Eigen::VectorXd noisy = clean;
    for (int i = 0; i < noisy.size(); ++i) noisy[i] += sigma * rng.normal();
    ++attempts;
    try {
      const TransectFitResult fit = fit_standoff(x, noisy, s, p, false);
      if (fit.converged && std::abs(fit.h - s.standoff) / s.standoff < 0.10) ++hits;
    } catch (const ValidationError&) {
      // non-convergence counts as a miss
    }
  }
  CHECK(attempts == 500);
  CHECK(hits >= 475);
}

TEST_CASE("degenerate transects are rejected or flagged") {
  const NvSensorParams p = paper_sensor();
  const StripGeometry s = strip_with(9.5e-6, 2.3e-6, 750e-6);

  SUBCASE("too few samples") {
    Eigen::VectorXd x(5), b(5);
    x << -20e-6, -10e-6, 0.0, 10e-6, 20e-6;
    b.setZero();
    CHECK_THROWS_AS(fit_standoff(x, b, s, p, false), ValidationError);
  }
  SUBCASE("span below 2w") {
    const auto [x, b] = make_transect(s, p, 41, 0.8 * s.width);
    CHECK_THROWS_AS(fit_standoff(x, b, s, p, false), ValidationError);
  }
  SUBCASE("all-zero transect: unidentifiable h") {
    Eigen::VectorXd x(41), b(41);
    for (int i = 0; i < 41; ++i) {
      x[i] = -24e-6 + 48e-6 * i / 40.0;
      b[i] = 0.0;
    }
    // with the current fitted, the zero signal is fit exactly by I = 0 and h
    // stays unidentifiable; either outcome (throw or non-converged flag) is
    // acceptable, a silent "converged" is not
    try {
      const TransectFitResult fit = fit_standoff(x, b, s, p, true);
      CHECK(!fit.converged);
    } catch (const ValidationError&) {
      CHECK(true);
    }
  }
}
