#include "qdm/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qdm/fft2.hpp"
#include "qdm/geometry.hpp"

namespace qdm {

namespace {

// Cosine roll-off (0 -> 1) over `taper` pixels at both ends of an n-point axis.
Eigen::ArrayXd edge_taper(int n, int taper) {
  Eigen::ArrayXd t = Eigen::ArrayXd::Ones(n);
  taper = std::min(taper, n / 2);
  for (int i = 0; i < taper; ++i) {
    const double r = 0.5 * (1.0 - std::cos(M_PI * (i + 0.5) / taper));
    t[i] = r;
    t[n - 1 - i] = r;
  }
  return t;
}

// Mean of exp(-k l) over l in [h, h + h_nv]: the Fourier-space counterpart of
// the NV-layer thickness average.
double layer_attenuation(double k, double h, double h_nv) {
  if (k == 0.0) return 1.0;
  if (h_nv <= 0.0) return std::exp(-k * h);
  return std::exp(-k * h) * (-std::expm1(-k * h_nv)) / (k * h_nv);
}

double median_of(std::vector<double> v) {
  const size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double m = v[n / 2];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    m = 0.5 * (m + v[n / 2 - 1]);
  }
  return m;
}

}  // namespace

CurrentDensityMap invert_bnv(const ScalarRaster& b_sample,
                             const NvSensorParams& params, double h,
                             const InversionOptions& opts) {
  b_sample.validate();
  params.validate();
  require(b_sample.unit == Unit::Tesla, "invert_bnv: input must be a tesla raster");
  require(h > 0.0, "invert_bnv: standoff h must be > 0");
  require(opts.pad_factor >= 1, "invert_bnv: pad_factor must be >= 1");
  require(opts.window_cutoff > 0.0, "invert_bnv: window cutoff must be > 0");
  require(opts.window_kind == "hanning" || opts.window_kind == "none",
          "invert_bnv: unknown window kind '" + opts.window_kind + "'");

  const Grid2D& grid = b_sample.grid;
  const int nx = grid.nx, ny = grid.ny;
  const int npx = good_fft_size(opts.pad_factor * nx);
  const int npy = good_fft_size(opts.pad_factor * ny);
  const int ox = (npx - nx) / 2, oy = (npy - ny) / 2;

  Eigen::ArrayXXd padded = Eigen::ArrayXXd::Zero(npx, npy);
  const Eigen::ArrayXd tx = edge_taper(nx, opts.taper_px);
  const Eigen::ArrayXd ty = edge_taper(ny, opts.taper_px);
  for (int j = 0; j < ny; ++j)
    padded.block(ox, oy + j, nx, 1) = b_sample.values.col(j) * tx * ty[j];

  Eigen::ArrayXXcd bhat = fft2(padded);

  const std::vector<double> kxs = fft_freqs(npx, grid.pitch);
  const std::vector<double> kys = fft_freqs(npy, grid.pitch);
  const double sin_t = std::sin(params.theta), cos_t = std::cos(params.theta);
  const double cos_p = std::cos(params.phi), sin_p = std::sin(params.phi);
  const double kc = 2.0 * M_PI / opts.window_cutoff;
  const double eps2 = opts.tikhonov * opts.tikhonov;

  Eigen::ArrayXXcd kx_hat = Eigen::ArrayXXcd::Zero(npx, npy);
  Eigen::ArrayXXcd ky_hat = Eigen::ArrayXXcd::Zero(npx, npy);

  long retained = 0, singular = 0;
  double max_cont = 0.0;
  for (int j = 0; j < npy; ++j) {
    const double ky = kys[j];
    for (int i = 0; i < npx; ++i) {
      const double kx = kxs[i];
      const double k = std::hypot(kx, ky);
      if (k == 0.0) continue;  // no current information in the uniform mode
      double win = 1.0;
      if (opts.window_kind == "hanning")
        win = (k <= kc) ? 0.5 * (1.0 + std::cos(M_PI * k / kc)) : 0.0;
      if (win == 0.0) continue;
      ++retained;
      // b = (mu0/2) att (k cosT + i sinT (kx cosP + ky sinP)) g,
      // with Kx = i ky g, Ky = -i kx g (continuity built in).
      const std::complex<double> dir(k * cos_t, sin_t * (kx * cos_p + ky * sin_p));
      if (std::abs(dir) < 1e-12 * k) {
        ++singular;
        continue;
      }
      const double att = layer_attenuation(k, h, params.h_nv);
      const std::complex<double> denom = 0.5 * kMu0 * att * dir;
      std::complex<double> g;
      if (eps2 > 0.0)
        g = bhat(i, j) * std::conj(denom) / (std::norm(denom) + eps2);
      else
        g = bhat(i, j) / denom;
      g *= win;
      const std::complex<double> kxh = std::complex<double>(0.0, ky) * g;
      const std::complex<double> kyh = std::complex<double>(0.0, -kx) * g;
      kx_hat(i, j) = kxh;
      ky_hat(i, j) = kyh;
      const double kmagh = std::abs(kxh) + std::abs(kyh);
      if (kmagh > 0.0)
        max_cont = std::max(max_cont, std::abs(kx * kxh + ky * kyh) / (k * kmagh));
    }
  }
  if (retained > 0 && singular > 0.3 * retained)
    throw ValidationError(
        "invert_bnv: projection kernel singular on > 30% of retained modes; "
        "use a different NV axis or vector field data");

  const Eigen::ArrayXXd kx_full = ifft2_real(kx_hat);
  const Eigen::ArrayXXd ky_full = ifft2_real(ky_hat);

  CurrentDensityMap out;
  out.kx = ScalarRaster(grid, Unit::AmperePerMeter, kx_full.block(ox, oy, nx, ny));
  out.ky = ScalarRaster(grid, Unit::AmperePerMeter, ky_full.block(ox, oy, nx, ny));
  out.kmag = ScalarRaster(grid, Unit::AmperePerMeter,
                          (out.kx.values.square() + out.ky.values.square()).sqrt());
  out.standoff_used = h;
  out.window = opts;
  out.source_grid = grid;
  out.max_continuity_residual = max_cont;
  out.singular_mode_fraction = retained > 0 ? double(singular) / retained : 0.0;
  out.resolution_warning = grid.pitch > 0.5 * h;
  return out;
}

double sample_bilinear(const ScalarRaster& r, const Eigen::Vector2d& p) {
  const Eigen::Vector2d f = r.grid.index_of(p);
  const int nx = r.grid.nx, ny = r.grid.ny;
  int i0 = static_cast<int>(std::floor(f.x()));
  int j0 = static_cast<int>(std::floor(f.y()));
  i0 = std::clamp(i0, 0, nx - 2);
  j0 = std::clamp(j0, 0, ny - 2);
  const double ax = std::clamp(f.x() - i0, 0.0, 1.0);
  const double ay = std::clamp(f.y() - j0, 0.0, 1.0);
  return r.values(i0, j0) * (1 - ax) * (1 - ay) +
         r.values(i0 + 1, j0) * ax * (1 - ay) +
         r.values(i0, j0 + 1) * (1 - ax) * ay +
         r.values(i0 + 1, j0 + 1) * ax * ay;
}

namespace {

struct SingleTransect {
  double current;
  double mean_density;
  double baseline;
};

SingleTransect integrate_one(const CurrentDensityMap& kmap,
                             const Eigen::Vector2d& p0,
                             const Eigen::Vector2d& p1) {
  const double pitch = kmap.kx.grid.pitch;
  const Eigen::Vector2d d = p1 - p0;
  const double length = d.norm();
  const Eigen::Vector2d that = d / length;
  const Eigen::Vector2d nhat(-that.y(), that.x());

  const int ns = static_cast<int>(std::lround(length / (0.5 * pitch))) + 1;
  const double step = length / (ns - 1);
  Eigen::ArrayXd v(ns), tang(ns);
  for (int i = 0; i < ns; ++i) {
    const Eigen::Vector2d p = p0 + (i * step) * that;
    const double kx = sample_bilinear(kmap.kx, p);
    const double ky = sample_bilinear(kmap.ky, p);
    v[i] = kx * nhat.x() + ky * nhat.y();
    tang[i] = kx * that.x() + ky * that.y();
  }

  // Flank baseline: the inversion zeroes the k=0 mode, which leaves a
  // near-uniform return-current offset; the two flank medians recover it
  // (and their average cancels the odd part of the artifact).
  const int nf = std::max(3, static_cast<int>(std::lround(0.25 * ns)));
  std::vector<double> head(v.data(), v.data() + nf);
  std::vector<double> tail(v.data() + ns - nf, v.data() + ns);
  const double baseline = 0.5 * (median_of(std::move(head)) + median_of(std::move(tail)));

  const Eigen::ArrayXd vc = v - baseline;
  double integral = 0.0;
  for (int i = 0; i + 1 < ns; ++i) integral += 0.5 * (vc[i] + vc[i + 1]) * step;

  const Eigen::ArrayXd mag = (vc.square() + tang.square()).sqrt();
  const double thresh = 0.1 * mag.maxCoeff();
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < ns; ++i) {
    if (mag[i] > thresh) {
      sum += vc[i];
      ++count;
    }
  }
  return {integral, count > 0 ? sum / count : 0.0, baseline};
}

}  // namespace

TransectCurrent integrate_current(const CurrentDensityMap& kmap,
                                  const Transect& transect, int band_count,
                                  double band_spacing) {
  kmap.kx.validate();
  kmap.ky.validate();
  require_coregistered(kmap.kx, kmap.ky, "integrate_current");
  require(band_count >= 1, "integrate_current: band_count must be >= 1");
  const double pitch = kmap.kx.grid.pitch;
  const double length = (transect.p1 - transect.p0).norm();
  require(length >= 3.0 * pitch, "integrate_current: transect shorter than 3 pixels");
  if (band_spacing <= 0.0) band_spacing = pitch;

  const Eigen::Vector2d that = (transect.p1 - transect.p0).normalized();
  const Eigen::Vector2d nhat(-that.y(), that.x());

  std::vector<double> currents, densities, baselines;
  currents.reserve(band_count);
  for (int b = 0; b < band_count; ++b) {
    const double off = (b - 0.5 * (band_count - 1)) * band_spacing;
    const Eigen::Vector2d shift = off * nhat;
    const SingleTransect s =
        integrate_one(kmap, transect.p0 + shift, transect.p1 + shift);
    currents.push_back(s.current);
    densities.push_back(s.mean_density);
    baselines.push_back(s.baseline);
  }

  TransectCurrent out;
  const auto mean = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / x.size();
  };
  out.current = mean(currents);
  out.mean_density = mean(densities);
  out.baseline = mean(baselines);
  double var = 0.0;
  for (double c : currents) var += (c - out.current) * (c - out.current);
  out.std = std::sqrt(var / currents.size());
  return out;
}

std::vector<Glyph> vector_glyphs(const CurrentDensityMap& kmap, double threshold,
                                 int stride) {
  require(threshold >= 0.0, "vector_glyphs: threshold must be >= 0");
  require(stride >= 1, "vector_glyphs: stride must be >= 1");
  std::vector<Glyph> glyphs;
  const Grid2D& g = kmap.kmag.grid;
  for (int iy = 0; iy < g.ny; iy += stride) {
    for (int ix = 0; ix < g.nx; ix += stride) {
      if (kmap.kmag.values(ix, iy) > threshold) {
        glyphs.push_back({g.point_at(ix, iy),
                          {kmap.kx.values(ix, iy), kmap.ky.values(ix, iy)}});
      }
    }
  }
  return glyphs;
}

}  // namespace qdm
