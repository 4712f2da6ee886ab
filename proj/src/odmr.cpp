#include "qdm/odmr.hpp"

#include <algorithm>
#include <cmath>

#include "qdm/levmar.hpp"
#include "qdm/parallel.hpp"
#include "qdm/rng.hpp"

namespace qdm {

double lorentzian_doublet(double f, double c1, double d1, double f1, double c2,
                          double d2, double f2, double offset) {
  const double u1 = (f - f1) / d1;
  const double u2 = (f - f2) / d2;
  return 1.0 + offset - c1 / (1.0 + u1 * u1) - c2 / (1.0 + u2 * u2);
}

namespace {

constexpr double kFluorFloor = 1e-9;

Eigen::VectorXd frequency_axis(double center, double span, int n) {
  return Eigen::VectorXd::LinSpaced(n, center - 0.5 * span, center + 0.5 * span);
}

void synth_branch(OdmrStack& stack, const ScalarRaster& b_total,
                  const NvSensorParams& params, const AcquisitionParams& acq,
                  OdmrBranch branch, int threads) {
  const long npix = b_total.grid.npixels();
  const double hf = 0.5 * params.hyperfine_mhz;
  const int nf = acq.n_f;
  const uint64_t branch_tag = branch == OdmrBranch::FMinus ? 0 : 1;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const double* b = b_total.values.data();
  parallel_for(npix, threads, [&](long p0, long p1) {
    for (long p = p0; p < p1; ++p) {
      const auto [fm, fp] = resonance_pair(params, b[p] * kMilliteslaPerTesla);
      const double fc = branch == OdmrBranch::FMinus ? fm : fp;
      GaussianStream rng = GaussianStream::substream(acq.seed, 2 * p + branch_tag);
      for (int i = 0; i < nf; ++i) {
        const double f = stack.freqs_mhz[i];
        double v = lorentzian_doublet(f, acq.contrast, acq.linewidth_mhz, fc - hf,
                                      acq.contrast, acq.linewidth_mhz, fc + hf,
                                      acq.offset);
        if (acq.noise_sigma > 0.0) v += acq.noise_sigma * rng.normal();
        stack.frames(i, p) = std::clamp(v, kFluorFloor, 2.0 - kFluorFloor);
      }
    }
  });
  // span check (single pass, sequential: cheap)
  for (long p = 0; p < npix; ++p) {
    const auto [fm, fp] = resonance_pair(params, b[p] * kMilliteslaPerTesla);
    const double fc = branch == OdmrBranch::FMinus ? fm : fp;
    lo = std::min(lo, fc - hf);
    hi = std::max(hi, fc + hf);
  }
  const double margin = 0.2 * acq.span_mhz;
  if (lo < stack.freqs_mhz[0] - margin || hi > stack.freqs_mhz[nf - 1] + margin) {
    stack.warnings.push_back(
        std::string(branch_name(branch)) +
        ": resonance dips fall outside the sweep span by > 20%; fits will be unreliable");
  }
}

}  // namespace

std::pair<OdmrStack, OdmrStack> synth_stack(const ScalarRaster& b_total,
                                            const NvSensorParams& params,
                                            const AcquisitionParams& acq,
                                            int threads) {
  b_total.validate();
  params.validate();
  acq.validate();
  require(b_total.unit == Unit::Tesla, "synth_stack: field map must be tesla");

  const double mean_mt = b_total.values.mean() * kMilliteslaPerTesla;
  const auto [fm_c, fp_c] = resonance_pair(params, mean_mt);

  OdmrStack minus, plus;
  minus.grid = plus.grid = b_total.grid;
  minus.branch = OdmrBranch::FMinus;
  plus.branch = OdmrBranch::FPlus;
  minus.sweeps_averaged = plus.sweeps_averaged = acq.sweeps_averaged;
  minus.freqs_mhz = frequency_axis(fm_c, acq.span_mhz, acq.n_f);
  plus.freqs_mhz = frequency_axis(fp_c, acq.span_mhz, acq.n_f);
  minus.frames.resize(acq.n_f, b_total.grid.npixels());
  plus.frames.resize(acq.n_f, b_total.grid.npixels());

  synth_branch(minus, b_total, params, acq, OdmrBranch::FMinus, threads);
  synth_branch(plus, b_total, params, acq, OdmrBranch::FPlus, threads);
  minus.validate();
  plus.validate();
  return {std::move(minus), std::move(plus)};
}

LorentzianFit initial_guess(const Eigen::VectorXd& freqs_mhz,
                            const Eigen::Ref<const Eigen::VectorXd>& values) {
  const int n = static_cast<int>(freqs_mhz.size());
  require(n >= 5 && values.size() == n, "initial_guess: bad spectrum");

  // 5-point moving average
  Eigen::VectorXd smooth(n);
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - 2), b = std::min(n - 1, i + 2);
    smooth[i] = values.segment(a, b - a + 1).mean();
  }

  // offset from the upper-quartile mean (model baseline is 1 + C)
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const int q = std::max(1, n / 4);
  double top = 0.0;
  for (int i = n - q; i < n; ++i) top += sorted[i];
  const double baseline = top / q;

  // two deepest local minima of the smoothed spectrum
  std::vector<int> minima;
  for (int i = 1; i + 1 < n; ++i)
    if (smooth[i] < smooth[i - 1] && smooth[i] <= smooth[i + 1]) minima.push_back(i);
  std::sort(minima.begin(), minima.end(),
            [&](int a, int b) { return smooth[a] < smooth[b]; });
  int i1, i2;
  if (minima.size() >= 2) {
    i1 = minima[0];
    i2 = minima[1];
  } else {
    int imin = 0;
    smooth.minCoeff(&imin);
    i1 = imin;
    i2 = std::min(n - 1, imin + std::max(2, n / 16));  // split a blended doublet
  }
  if (freqs_mhz[i1] > freqs_mhz[i2]) std::swap(i1, i2);

  const double df = (freqs_mhz[n - 1] - freqs_mhz[0]) / (n - 1);
  auto hwhm_from = [&](int idx, double depth) {
    const double half = smooth[idx] + 0.5 * depth;
    int l = idx, r = idx;
    while (l > 0 && smooth[l] < half) --l;
    while (r < n - 1 && smooth[r] < half) ++r;
    return std::max(0.5 * df, 0.25 * (freqs_mhz[r] - freqs_mhz[l]));
  };

  LorentzianFit g;
  g.f1 = freqs_mhz[i1];
  g.f2 = freqs_mhz[i2];
  g.c1 = std::max(1e-4, baseline - smooth[i1]);
  g.c2 = std::max(1e-4, baseline - smooth[i2]);
  g.delta1 = hwhm_from(i1, g.c1);
  g.delta2 = hwhm_from(i2, g.c2);
  g.offset = baseline - 1.0;
  g.branch_center = 0.5 * (g.f1 + g.f2);
  return g;
}

LorentzianFit fit_pixel(const Eigen::VectorXd& freqs_mhz,
                        const Eigen::Ref<const Eigen::VectorXd>& values,
                        const LorentzianFit& init, const FitOptions& opts) {
  const int n = static_cast<int>(freqs_mhz.size());
  require(values.size() == n, "fit_pixel: spectrum length mismatch");
  const int np = opts.tied ? 5 : 7;
  require(n >= np, "fit_pixel: need at least as many samples as free parameters");

  // parameter order: c1, d1, f1, c2, d2, f2, C  (tied: c, d, f1, f2, C)
  Eigen::VectorXd p(np);
  if (opts.tied) {
    p << 0.5 * (init.c1 + init.c2), 0.5 * (init.delta1 + init.delta2), init.f1,
        init.f2, init.offset;
  } else {
    p << init.c1, init.delta1, init.f1, init.c2, init.delta2, init.f2, init.offset;
  }

  auto unpack = [&](const Eigen::VectorXd& q, double& c1, double& d1, double& f1,
                    double& c2, double& d2, double& f2, double& C) {
    if (opts.tied) {
      c1 = c2 = q[0];
      d1 = d2 = q[1];
      f1 = q[2];
      f2 = q[3];
      C = q[4];
    } else {
      c1 = q[0]; d1 = q[1]; f1 = q[2];
      c2 = q[3]; d2 = q[4]; f2 = q[5];
      C = q[6];
    }
  };

  auto residuals = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r,
                       Eigen::MatrixXd* J) {
    double c1, d1, f1, c2, d2, f2, C;
    unpack(q, c1, d1, f1, c2, d2, f2, C);
    for (int i = 0; i < n; ++i) {
      const double f = freqs_mhz[i];
      const double u1 = (f - f1) / d1;
      const double u2 = (f - f2) / d2;
      const double L1 = 1.0 / (1.0 + u1 * u1);
      const double L2 = 1.0 / (1.0 + u2 * u2);
      r[i] = (1.0 + C - c1 * L1 - c2 * L2) - values[i];
      if (!J) continue;
      const double dc1 = -L1;
      const double dd1 = -c1 * 2.0 * u1 * u1 / d1 * L1 * L1;
      const double df1 = -c1 * 2.0 * u1 / d1 * L1 * L1;
      const double dc2 = -L2;
      const double dd2 = -c2 * 2.0 * u2 * u2 / d2 * L2 * L2;
      const double df2 = -c2 * 2.0 * u2 / d2 * L2 * L2;
      if (opts.tied) {
        (*J)(i, 0) = dc1 + dc2;
        (*J)(i, 1) = dd1 + dd2;
        (*J)(i, 2) = df1;
        (*J)(i, 3) = df2;
        (*J)(i, 4) = 1.0;
      } else {
        (*J)(i, 0) = dc1;
        (*J)(i, 1) = dd1;
        (*J)(i, 2) = df1;
        (*J)(i, 3) = dc2;
        (*J)(i, 4) = dd2;
        (*J)(i, 5) = df2;
        (*J)(i, 6) = 1.0;
      }
    }
  };

  LevMarOptions lm;
  lm.max_iterations = opts.max_iterations;
  const LevMarResult res = levmar_solve(residuals, p, n, lm);

  LorentzianFit out;
  double c1, d1, f1, c2, d2, f2, C;
  unpack(res.params, c1, d1, f1, c2, d2, f2, C);
  d1 = std::abs(d1);  // model is even in delta
  d2 = std::abs(d2);
  if (f1 > f2) {
    std::swap(f1, f2);
    std::swap(c1, c2);
    std::swap(d1, d2);
  }
  out.c1 = c1; out.c2 = c2;
  out.delta1 = d1; out.delta2 = d2;
  out.f1 = f1; out.f2 = f2;
  out.offset = C;
  out.branch_center = 0.5 * (f1 + f2);
  out.residual_rms = std::sqrt(res.cost / n);
  out.iterations = res.iterations;

  Eigen::VectorXd cov;
  const bool cov_ok = levmar_covariance(res, n, cov);
  const bool in_range = c1 >= 0.0 && c1 < 1.0 && c2 >= 0.0 && c2 < 1.0 &&
                        d1 > 0.0 && d2 > 0.0 && std::isfinite(f1) &&
                        std::isfinite(f2);
  out.converged = res.converged && cov_ok && in_range;
  return out;
}

ScalarRaster subtract_bias(const ScalarRaster& b_total,
                           const ScalarRaster& b_openckt) {
  return subtract(b_total, b_openckt);
}

namespace {

// 3x3 median of converged neighbors; fallback to the pixel's own value.
double median_infill(const Eigen::ArrayXXd& b, const std::vector<char>& ok,
                     int nx, int ny, int ix, int iy) {
  std::vector<double> nb;
  nb.reserve(8);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int jx = ix + dx, jy = iy + dy;
      if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
      if (ok[jx + static_cast<long>(nx) * jy]) nb.push_back(b(jx, jy));
    }
  }
  if (nb.empty()) return b(ix, iy);
  std::sort(nb.begin(), nb.end());
  const size_t m = nb.size() / 2;
  return nb.size() % 2 ? nb[m] : 0.5 * (nb[m - 1] + nb[m]);
}

}  // namespace

BnvExtraction extract_bnv_map(const OdmrStack& stack_minus,
                              const OdmrStack& stack_plus,
                              const NvSensorParams& params,
                              const ExtractOptions& opts) {
  stack_minus.validate();
  stack_plus.validate();
  params.validate();
  require(stack_minus.branch == OdmrBranch::FMinus,
          "extract_bnv_map: first stack must be the f_minus branch");
  require(stack_plus.branch == OdmrBranch::FPlus,
          "extract_bnv_map: second stack must be the f_plus branch");
  require(stack_minus.grid.same_as(stack_plus.grid),
          "extract_bnv_map: stacks are not co-registered");

  const Grid2D& grid = stack_minus.grid;
  const long npix = grid.npixels();
  const int nx = grid.nx, ny = grid.ny;

  BnvExtraction out;
  out.bnv = raster_new(grid, Unit::Tesla, 0.0);
  out.center_minus = raster_new(grid, Unit::Megahertz, 0.0);
  out.center_plus = raster_new(grid, Unit::Megahertz, 0.0);
  std::vector<char> ok(npix, 0);

  parallel_for(npix, opts.threads, [&](long p0, long p1) {
    for (long p = p0; p < p1; ++p) {
      const auto spec_m = stack_minus.frames.col(p).matrix();
      const auto spec_p = stack_plus.frames.col(p).matrix();
      const LorentzianFit fm = fit_pixel(stack_minus.freqs_mhz, spec_m,
                                         initial_guess(stack_minus.freqs_mhz, spec_m),
                                         opts.fit);
      const LorentzianFit fp = fit_pixel(stack_plus.freqs_mhz, spec_p,
                                         initial_guess(stack_plus.freqs_mhz, spec_p),
                                         opts.fit);
      out.center_minus.values.data()[p] = fm.branch_center;
      out.center_plus.values.data()[p] = fp.branch_center;
      out.bnv.values.data()[p] =
          field_from_resonances(params, fm.branch_center, fp.branch_center) /
          kMilliteslaPerTesla;
      ok[p] = fm.converged && fp.converged;
    }
  });

  long bad = 0;
  for (long p = 0; p < npix; ++p)
    if (!ok[p]) ++bad;
  out.n_nonconverged = bad;
  const double frac = static_cast<double>(bad) / npix;
  if (frac > opts.max_nonconverged_fraction) {
    throw QualityGateError("extract_bnv_map: " + std::to_string(frac * 100) +
                           "% of pixel fits did not converge (gate " +
                           std::to_string(opts.max_nonconverged_fraction * 100) +
                           "%)");
  }

  if (bad > 0) {
    const Eigen::ArrayXXd raw = out.bnv.values;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const long p = ix + static_cast<long>(nx) * iy;
        if (ok[p]) continue;
        out.bnv.values(ix, iy) = median_infill(raw, ok, nx, ny, ix, iy);
        out.infilled.push_back(p);
      }
    }
  }
  out.bnv.validate();
  return out;
}

}  // namespace qdm
