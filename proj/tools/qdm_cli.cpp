// qdm — simulate and analyze wide-field NV magnetometry of planar circuits.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qdm/heatmap.hpp"
#include "qdm/io.hpp"
#include "qdm/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "pipeline config (JSON)")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "override the config worker count");
  cmd->add_option("--out-dir", args.out_dir, "override the config output directory");
}

qdm::PipelineConfig load(const CommonArgs& args) {
  qdm::PipelineConfig c = qdm::load_config(args.config_path);
  if (args.seed) {
    c.seed = *args.seed;
    c.acquisition.seed = *args.seed;
  }
  if (args.threads) {
    c.threads = *args.threads;
    c.extract.threads = *args.threads;
  }
  if (args.out_dir) c.io.out_dir = *args.out_dir;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-diamond magnetometry current-imaging pipeline"};
  app.require_subcommand(1);

  CommonArgs synth_args, fit_args, invert_args, calib_args, report_args,
      heatmap_args, analyze_args;

  CLI::App* synth = app.add_subcommand("synth", "synthesize ODMR stacks + ground truth");
  add_common(synth, synth_args);

  CLI::App* fit = app.add_subcommand("fit", "per-pixel ODMR fits -> B_NV maps");
  add_common(fit, fit_args);

  CLI::App* invert = app.add_subcommand("invert", "B_NV map -> current density maps");
  add_common(invert, invert_args);
  std::string invert_input;
  invert->add_option("--input", invert_input, "b_sample raster (default: out dir)");

  CLI::App* calibrate = app.add_subcommand("calibrate", "fit stand-off from a transect");
  add_common(calibrate, calib_args);

  CLI::App* report = app.add_subcommand("report", "integrate taps and build the comparison table");
  add_common(report, report_args);

  CLI::App* heatmap = app.add_subcommand("heatmap", "render a raster as an 8-bit image");
  add_common(heatmap, heatmap_args);
  std::string hm_input, hm_output, hm_colormap;
  double hm_glyph_threshold = -1.0;
  int hm_glyph_stride = 8;
  heatmap->add_option("--input", hm_input, "raster file")->required();
  heatmap->add_option("--output", hm_output, "image file (.ppm)")->required();
  heatmap->add_option("--colormap", hm_colormap, "diverging | gray");
  heatmap->add_option("--glyph-threshold", hm_glyph_threshold,
                      "overlay K glyphs above this |K| (needs k_kx/k_ky in out dir)");
  heatmap->add_option("--glyph-stride", hm_glyph_stride, "glyph lattice stride, pixels");

  CLI::App* analyze = app.add_subcommand("analyze", "full pipeline: fit -> invert -> report");
  add_common(analyze, analyze_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      qdm::run_synth(load(synth_args));
    } else if (fit->parsed()) {
      const auto c = load(fit_args);
      const auto r = qdm::run_fit(c);
      std::cout << "fit: " << r.n_nonconverged << " non-converged pixels, "
                << r.n_infilled << " infilled\n";
    } else if (invert->parsed()) {
      const auto c = load(invert_args);
      const std::string input = invert_input.empty()
                                    ? (std::filesystem::path(c.io.out_dir) / "b_sample.qdmr").string()
                                    : invert_input;
      const qdm::ScalarRaster b = qdm::read_raster(input);
      const auto kmap = qdm::run_invert(c, b, qdm::inversion_standoff(c, std::nullopt));
      std::cout << "invert: wrote K maps (max |K| = " << kmap.kmag.values.maxCoeff()
                << " A/m, continuity residual " << kmap.max_continuity_residual << ")\n";
    } else if (calibrate->parsed()) {
      const auto c = load(calib_args);
      const auto cal = qdm::run_calibrate(c);
      std::cout << "calibrate: h = " << cal.fit.h * 1e6 << " um (x0 = "
                << cal.fit.center_offset * 1e6 << " um, I = " << cal.fit.current * 1e6
                << " uA, rms = " << cal.fit.residual_rms * 1e6
                << " uT, converged = " << (cal.fit.converged ? "yes" : "no") << ")\n";
      if (!cal.fit.converged) return 2;
    } else if (report->parsed()) {
      const auto c = load(report_args);
      const auto dir = std::filesystem::path(c.io.out_dir);
      qdm::CurrentDensityMap kmap;
      kmap.kx = qdm::read_raster(dir / "k_kx.qdmr");
      kmap.ky = qdm::read_raster(dir / "k_ky.qdmr");
      kmap.kmag = qdm::read_raster(dir / "k_kmag.qdmr");
      const auto rep = qdm::run_report(c, kmap);
      std::cout << qdm::render_report_text(rep.rows);
    } else if (heatmap->parsed()) {
      const auto c = load(heatmap_args);
      const qdm::ScalarRaster r = qdm::read_raster(hm_input);
      qdm::HeatmapScale scale = qdm::auto_scale(r);
      if (!hm_colormap.empty()) scale.colormap = hm_colormap;
      std::vector<qdm::Glyph> glyphs;
      if (hm_glyph_threshold >= 0.0) {
        const auto dir = std::filesystem::path(c.io.out_dir);
        qdm::CurrentDensityMap kmap;
        kmap.kx = qdm::read_raster(dir / "k_kx.qdmr");
        kmap.ky = qdm::read_raster(dir / "k_ky.qdmr");
        kmap.kmag = qdm::read_raster(dir / "k_kmag.qdmr");
        glyphs = qdm::vector_glyphs(kmap, hm_glyph_threshold, hm_glyph_stride);
      }
      const int n = qdm::emit_heatmap(r, scale, hm_output, glyphs);
      std::cout << "heatmap: wrote " << hm_output << " (" << n << " glyphs)\n";
    } else if (analyze->parsed()) {
      const auto c = load(analyze_args);
      qdm::run_analyze(c, analyze_args.config_path);
    }
  } catch (const qdm::QualityGateError& e) {
    std::cerr << "quality gate: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
