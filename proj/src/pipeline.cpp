#include "qdm/pipeline.hpp"

#include <chrono>
#include <iostream>

#include <json.hpp>

#include "qdm/forward_model.hpp"
#include "qdm/heatmap.hpp"
#include "qdm/io.hpp"

namespace qdm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageTimer {
public:
  void start(const std::string& stage) {
    stage_ = stage;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    const auto dt = std::chrono::steady_clock::now() - t0_;
    timings_[stage_] =
        std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
  }
  const std::map<std::string, long>& timings() const { return timings_; }

private:
  std::string stage_;
  std::chrono::steady_clock::time_point t0_;
  std::map<std::string, long> timings_;
};

fs::path out_path(const PipelineConfig& c, const std::string& name) {
  return fs::path(c.io.out_dir) / name;
}

double coverage(double lo, double hi, double a, double b) {
  return std::max(0.0, std::min(hi, b) - std::max(lo, a)) / (hi - lo);
}

}  // namespace

CurrentDensityMap make_strip_k_map(const StripGeometry& strip, const Grid2D& grid) {
  strip.validate();
  grid.validate();
  CurrentDensityMap m;
  m.kx = raster_new(grid, Unit::AmperePerMeter, 0.0);
  m.ky = raster_new(grid, Unit::AmperePerMeter, 0.0);
  const double k = strip.current / strip.width;
  const Eigen::Vector2d n = strip.normal();
  const double half = 0.5 * grid.pitch;
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double t = (grid.point_at(ix, iy) - strip.center).dot(n);
      const double cov =
          coverage(t - half, t + half, -0.5 * strip.width, 0.5 * strip.width);
      m.kx.values(ix, iy) = k * cov * strip.axis.x();
      m.ky.values(ix, iy) = k * cov * strip.axis.y();
    }
  }
  m.kmag = ScalarRaster(grid, Unit::AmperePerMeter,
                        (m.kx.values.square() + m.ky.values.square()).sqrt());
  m.standoff_used = strip.standoff;
  m.source_grid = grid;
  return m;
}

CurrentDensityMap make_path_k_map(const CurrentPath& path, const Grid2D& grid) {
  path.validate();
  grid.validate();
  const auto& v = path.vertices;
  std::vector<Eigen::Vector2d> u(v.size() - 1);
  for (size_t i = 0; i + 1 < v.size(); ++i) u[i] = (v[i + 1] - v[i]).normalized();
  auto rot90 = [](const Eigen::Vector2d& a) { return Eigen::Vector2d(-a.y(), a.x()); };
  auto cross2 = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
  };

  const double k = path.current / path.width;
  const double half = 0.5 * grid.pitch;
  CurrentDensityMap m;
  m.kx = raster_new(grid, Unit::AmperePerMeter, 0.0);
  m.ky = raster_new(grid, Unit::AmperePerMeter, 0.0);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const Eigen::Vector2d p = grid.point_at(ix, iy);
      for (size_t i = 0; i < u.size(); ++i) {
        const Eigen::Vector2d n = rot90(u[i]);
        const double t = (p - v[i]).dot(n);
        if (std::abs(t) > 0.5 * path.width + half) continue;
        const double s = (p - v[i]).dot(u[i]);
        // miter-trimmed longitudinal extent at this lateral offset
        double s_lo = 0.0, s_hi = (v[i + 1] - v[i]).norm();
        if (i > 0) {
          const double cr = cross2(u[i], u[i - 1]);
          if (std::abs(cr) > 1e-12)
            s_lo = cross2(t * rot90(u[i - 1]) - t * n, u[i - 1]) / cr;
        }
        if (i + 1 < u.size()) {
          const double cr = cross2(u[i], u[i + 1]);
          if (std::abs(cr) > 1e-12)
            s_hi += cross2(t * rot90(u[i + 1]) - t * n, u[i + 1]) / cr;
        }
        if (s < s_lo || s > s_hi) continue;
        const double cov =
            coverage(t - half, t + half, -0.5 * path.width, 0.5 * path.width);
        m.kx.values(ix, iy) = k * cov * u[i].x();
        m.ky.values(ix, iy) = k * cov * u[i].y();
        break;
      }
    }
  }
  m.kmag = ScalarRaster(grid, Unit::AmperePerMeter,
                        (m.kx.values.square() + m.ky.values.square()).sqrt());
  m.standoff_used = path.standoff;
  m.source_grid = grid;
  return m;
}

ScalarRaster forward_sample_map(const PipelineConfig& c) {
  require(!c.strips.empty() || !c.paths.empty(),
          "forward_sample_map: config has no geometry");
  ScalarRaster acc = raster_new(c.grid, Unit::Tesla, 0.0);
  for (const auto& s : c.strips) {
    const ScalarRaster b = averaged_bnv_map(s, c.grid, c.sensor, c.forward_quadrature_n);
    acc.values += b.values;
  }
  for (const auto& p : c.paths) {
    const ScalarRaster b =
        averaged_bnv_map(p, c.grid, c.sensor, c.forward_quadrature_n, c.path_filaments);
    acc.values += b.values;
  }
  acc.validate();
  return acc;
}

SynthResult run_synth(const PipelineConfig& c) {
  c.validate();
  const ScalarRaster b_sample = forward_sample_map(c);
  const double bias_t = c.sensor.bias_field_mt / kMilliteslaPerTesla;
  ScalarRaster b_total(b_sample.grid, Unit::Tesla, b_sample.values + bias_t);

  const auto [minus, plus] = synth_stack(b_total, c.sensor, c.acquisition, c.threads);

  SynthResult r;
  r.stack_minus = out_path(c, c.io.stack_minus);
  r.stack_plus = out_path(c, c.io.stack_plus);
  r.b_sample_true = out_path(c, "b_sample_true.qdmr");
  r.b_total_true = out_path(c, "b_total_true.qdmr");
  r.k_true_kx = out_path(c, "k_true_kx.qdmr");
  r.k_true_ky = out_path(c, "k_true_ky.qdmr");
  r.k_true_kmag = out_path(c, "k_true_kmag.qdmr");
  write_stack(r.stack_minus, minus);
  write_stack(r.stack_plus, plus);
  write_raster(r.b_sample_true, b_sample);
  write_raster(r.b_total_true, b_total);

  // ground-truth current density (sum of conductors)
  CurrentDensityMap ktrue;
  ktrue.kx = raster_new(c.grid, Unit::AmperePerMeter, 0.0);
  ktrue.ky = raster_new(c.grid, Unit::AmperePerMeter, 0.0);
  for (const auto& s : c.strips) {
    const CurrentDensityMap m = make_strip_k_map(s, c.grid);
    ktrue.kx.values += m.kx.values;
    ktrue.ky.values += m.ky.values;
  }
  for (const auto& p : c.paths) {
    const CurrentDensityMap m = make_path_k_map(p, c.grid);
    ktrue.kx.values += m.kx.values;
    ktrue.ky.values += m.ky.values;
  }
  ktrue.kmag = ScalarRaster(c.grid, Unit::AmperePerMeter,
                            (ktrue.kx.values.square() + ktrue.ky.values.square()).sqrt());
  write_raster(r.k_true_kx, ktrue.kx);
  write_raster(r.k_true_ky, ktrue.ky);
  write_raster(r.k_true_kmag, ktrue.kmag);

  r.max_abs_b_sample = b_sample.values.abs().maxCoeff();
  const double mean_mt = b_total.values.mean() * kMilliteslaPerTesla;
  const auto [fm, fp] = resonance_pair(c.sensor, mean_mt);
  const double shift = c.sensor.gamma_mhz_per_mt * r.max_abs_b_sample * kMilliteslaPerTesla;
  std::cout << "synth: max |B_sample| = " << r.max_abs_b_sample * 1e6 << " uT\n"
            << "synth: branch centers f- = " << fm << " MHz, f+ = " << fp
            << " MHz; max Zeeman shift " << shift << " MHz\n"
            << "synth: dips at f-/+ -+ " << 0.5 * c.sensor.hyperfine_mhz
            << " MHz (hyperfine doublet)\n"
            << "synth: peak |K_true| = " << ktrue.kmag.values.maxCoeff() << " A/m\n";
  return r;
}

FitResult run_fit(const PipelineConfig& c) {
  c.validate();
  const fs::path pm = out_path(c, c.io.stack_minus);
  const fs::path pp = out_path(c, c.io.stack_plus);
  if (!fs::exists(pm) || !fs::exists(pp))
    throw ValidationError("fit: missing stack file '" +
                          (fs::exists(pm) ? pp : pm).string() + "'");
  const OdmrStack minus = read_stack(pm);
  const OdmrStack plus = read_stack(pp);

  const BnvExtraction ext = extract_bnv_map(minus, plus, c.sensor, c.extract);

  FitResult r;
  r.b_total = ext.bnv;
  r.n_nonconverged = ext.n_nonconverged;
  r.n_infilled = static_cast<long>(ext.infilled.size());

  if (!c.io.open_stack_minus.empty()) {
    const fs::path om = out_path(c, c.io.open_stack_minus);
    const fs::path op = out_path(c, c.io.open_stack_plus);
    if (!fs::exists(om) || !fs::exists(op))
      throw ValidationError("fit: missing open-circuit stack file");
    const BnvExtraction open_ext =
        extract_bnv_map(read_stack(om), read_stack(op), c.sensor, c.extract);
    r.b_sample = subtract_bias(ext.bnv, open_ext.bnv);
  } else {
    const ScalarRaster bias = raster_new(r.b_total.grid, Unit::Tesla,
                                         c.sensor.bias_field_mt / kMilliteslaPerTesla);
    r.b_sample = subtract_bias(ext.bnv, bias);
  }

  write_raster(out_path(c, "b_total.qdmr"), r.b_total);
  write_raster(out_path(c, "b_sample.qdmr"), r.b_sample);
  return r;
}

CalibrationResult run_calibrate(const PipelineConfig& c, const ScalarRaster* b_sample) {
  c.validate();
  require(c.calibration.enabled, "calibrate: calibration is not enabled in the config");
  const StripGeometry& strip = c.strips.at(c.calibration.strip_index);

  Eigen::VectorXd x, b;
  CalibrationResult out;
  if (!c.calibration.transect_csv.empty()) {
    std::tie(x, b) = read_transect_csv(c.calibration.transect_csv);
    out.transect_csv = c.calibration.transect_csv;
  } else {
    require(b_sample != nullptr,
            "calibrate: no transect CSV configured and no field map supplied");
    // cut across the strip through its center, +-3 widths
    const Eigen::Vector2d n = strip.normal();
    const double half = 3.0 * strip.width;
    const int ns = static_cast<int>(std::floor(2.0 * half / (0.5 * c.grid.pitch))) + 1;
    x.resize(ns);
    b.resize(ns);
    for (int i = 0; i < ns; ++i) {
      const double s = -half + i * (2.0 * half / (ns - 1));
      x[i] = s;
      b[i] = sample_bilinear(*b_sample, strip.center + s * n);
    }
    out.transect_csv = out_path(c, "calibration_transect.csv");
    write_transect_csv(out.transect_csv, x, b);
  }

  StandoffFitOptions opts;
  opts.quadrature_n = c.forward_quadrature_n;
  StripGeometry unknown_h = strip;
  unknown_h.standoff = 0.0;  // ignored: fit starts from w/4
  out.fit = fit_standoff(x, b, unknown_h, c.sensor, c.calibration.fit_current, opts);
  return out;
}

CurrentDensityMap run_invert(const PipelineConfig& c, const ScalarRaster& b_sample,
                             double standoff) {
  const CurrentDensityMap kmap = invert_bnv(b_sample, c.sensor, standoff, c.inversion);
  write_raster(out_path(c, "k_kx.qdmr"), kmap.kx);
  write_raster(out_path(c, "k_ky.qdmr"), kmap.ky);
  write_raster(out_path(c, "k_kmag.qdmr"), kmap.kmag);
  return kmap;
}

double inversion_standoff(const PipelineConfig& c,
                          const std::optional<double>& calibrated) {
  if (c.inversion_standoff) return *c.inversion_standoff;
  if (calibrated) return *calibrated;
  if (!c.strips.empty()) return c.strips.front().standoff;
  if (!c.paths.empty()) return c.paths.front().standoff;
  throw ValidationError("inversion: no stand-off available (no geometry, no override)");
}

ReportResult run_report(const PipelineConfig& c, const CurrentDensityMap& kmap) {
  MirrorSpec spec;
  spec.wl_input = c.mirror.wl_input;
  spec.wl_unit = c.mirror.wl_unit;
  spec.n_parallel = c.mirror.n_parallel;
  spec.i_in = c.mirror.i_in;
  for (const auto& t : c.taps) spec.taps.push_back({t.name, t.multiplier});

  ReportResult r;
  std::map<std::string, double> qdm;
  for (const auto& t : c.taps) {
    const TransectCurrent tc =
        integrate_current(kmap, t.transect, t.band_count, t.band_spacing);
    r.tap_currents[t.name] = tc;
    qdm[t.name] = std::abs(tc.current);  // report magnitudes; sign lives in the K maps
  }

  std::map<std::string, ExternalRef> refs;
  if (!c.references_csv.empty()) refs = read_refs_csv(c.references_csv);
  r.rows = build_report(spec, qdm, refs);

  write_report_csv(out_path(c, "report.csv"), r.rows);
  atomic_write(out_path(c, "report.txt"),
               [&](std::ostream& os) { os << render_report_text(r.rows); });
  return r;
}

ReportResult run_analyze(const PipelineConfig& c, const fs::path& config_path) {
  StageTimer timer;
  json quality;

  timer.start("fit");
  FitResult fit;
  try {
    fit = run_fit(c);
  } catch (const QualityGateError& e) {
    throw QualityGateError(std::string("stage fit: ") + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("stage fit: ") + e.what());
  }
  timer.stop();
  quality["n_nonconverged"] = fit.n_nonconverged;
  quality["n_infilled"] = fit.n_infilled;

  std::optional<double> calibrated;
  if (c.calibration.enabled) {
    timer.start("calibrate");
    try {
      const CalibrationResult cal = run_calibrate(c, &fit.b_sample);
      calibrated = cal.fit.h;
      quality["calibrated_standoff_m"] = cal.fit.h;
      quality["calibration_converged"] = cal.fit.converged;
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("stage calibrate: ") + e.what());
    }
    timer.stop();
  }

  timer.start("invert");
  CurrentDensityMap kmap;
  try {
    kmap = run_invert(c, fit.b_sample, inversion_standoff(c, calibrated));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("stage invert: ") + e.what());
  }
  timer.stop();
  quality["max_continuity_residual"] = kmap.max_continuity_residual;
  quality["singular_mode_fraction"] = kmap.singular_mode_fraction;
  if (kmap.resolution_warning) quality["resolution_warning"] = true;

  timer.start("report");
  ReportResult report;
  try {
    report = run_report(c, kmap);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("stage report: ") + e.what());
  }
  timer.stop();

  json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = config_hash(config_path);
  manifest["seed"] = c.seed;
  manifest["threads"] = c.threads;
  manifest["timings_ms"] = timer.timings();
  manifest["quality"] = quality;
  atomic_write(out_path(c, "manifest.json"),
               [&](std::ostream& os) { os << manifest.dump(2) << "\n"; });

  std::cout << render_report_text(report.rows);
  return report;
}

}  // namespace qdm
