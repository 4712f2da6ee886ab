#include "qdm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qdm/io.hpp"

namespace qdm {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError("config parse error in '" + path.string() + "': " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ValidationError("config: unknown key '" + where + key + "'");
  }
}

double um(double v) { return v * 1e-6; }
double nm(double v) { return v * 1e-9; }
double ua(double v) { return v * 1e-6; }
double deg(double v) { return v * M_PI / 180.0; }

Eigen::Vector2d vec2(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2)
    throw ValidationError("config: '" + what + "' must be a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void PipelineConfig::validate() const {
  sensor.validate();
  grid.validate();
  for (const auto& s : strips) s.validate();
  for (const auto& p : paths) p.validate();
  acquisition.validate();
  require(threads >= 1, "config: threads must be >= 1");
  require(forward_quadrature_n >= 2, "config: forward_quadrature_n must be >= 2");
  require(path_filaments >= 1, "config: path_filaments must be >= 1");
  for (const auto& t : taps) {
    require(!t.name.empty(), "config: tap name must not be empty");
    require(t.band_count >= 1, "config: tap band_count must be >= 1");
    require(t.multiplier >= 1.0, "config: tap multiplier must be >= 1");
  }
  if (calibration.enabled) {
    const size_t idx = static_cast<size_t>(calibration.strip_index);
    require(idx < strips.size(), "config: calibration.strip_index out of range");
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const json root = parse_file(path);
  PipelineConfig c;

  reject_unknown(root, {"seed", "threads", "sensor", "grid", "geometry",
                        "acquisition", "fit", "inversion", "calibration",
                        "mirror", "taps", "references_csv", "io"},
                 "");

  c.seed = root.value("seed", 0ULL);
  c.threads = root.value("threads", 1);

  if (root.contains("sensor")) {
    const json& s = root["sensor"];
    reject_unknown(s, {"d_mhz", "gamma_mhz_per_mt", "theta_deg", "phi_deg",
                       "nv_layer_um", "bias_mt", "hyperfine_mhz"}, "sensor.");
    c.sensor.d_mhz = s.value("d_mhz", c.sensor.d_mhz);
    c.sensor.gamma_mhz_per_mt = s.value("gamma_mhz_per_mt", c.sensor.gamma_mhz_per_mt);
    if (s.contains("theta_deg")) c.sensor.theta = deg(s["theta_deg"].get<double>());
    if (s.contains("phi_deg")) c.sensor.phi = deg(s["phi_deg"].get<double>());
    if (s.contains("nv_layer_um")) c.sensor.h_nv = um(s["nv_layer_um"].get<double>());
    c.sensor.bias_field_mt = s.value("bias_mt", c.sensor.bias_field_mt);
    c.sensor.hyperfine_mhz = s.value("hyperfine_mhz", c.sensor.hyperfine_mhz);
  }

  if (root.contains("grid")) {
    const json& g = root["grid"];
    reject_unknown(g, {"nx", "ny", "pitch_nm", "origin_um"}, "grid.");
    const int nx = g.value("nx", 256);
    const int ny = g.value("ny", 256);
    const double pitch = nm(g.value("pitch_nm", 260.0));
    if (g.contains("origin_um"))
      c.grid = Grid2D(nx, ny, pitch, um(1.0) * vec2(g["origin_um"], "grid.origin_um"));
    else
      c.grid = Grid2D::centered(nx, ny, pitch);
  }

  if (root.contains("geometry")) {
    const json& ge = root["geometry"];
    reject_unknown(ge, {"strips", "paths", "quadrature_n", "path_filaments"},
                   "geometry.");
    c.forward_quadrature_n = ge.value("quadrature_n", c.forward_quadrature_n);
    c.path_filaments = ge.value("path_filaments", c.path_filaments);
    for (const json& sj : ge.value("strips", json::array())) {
      reject_unknown(sj, {"width_um", "standoff_um", "current_ua", "center_um", "axis"},
                     "geometry.strips[].");
      StripGeometry s;
      s.width = um(sj.at("width_um").get<double>());
      s.standoff = um(sj.at("standoff_um").get<double>());
      s.current = ua(sj.at("current_ua").get<double>());
      if (sj.contains("center_um")) s.center = um(1.0) * vec2(sj["center_um"], "center_um");
      if (sj.contains("axis")) s.axis = vec2(sj["axis"], "axis").normalized();
      c.strips.push_back(s);
    }
    for (const json& pj : ge.value("paths", json::array())) {
      reject_unknown(pj, {"width_um", "standoff_um", "current_ua", "vertices_um"},
                     "geometry.paths[].");
      CurrentPath p;
      p.width = um(pj.at("width_um").get<double>());
      p.standoff = um(pj.at("standoff_um").get<double>());
      p.current = ua(pj.at("current_ua").get<double>());
      for (const json& v : pj.at("vertices_um"))
        p.vertices.push_back(um(1.0) * vec2(v, "vertices_um[]"));
      c.paths.push_back(p);
    }
  }

  if (root.contains("acquisition")) {
    const json& a = root["acquisition"];
    reject_unknown(a, {"n_f", "span_mhz", "contrast", "linewidth_mhz", "offset",
                       "noise_sigma", "sweeps_averaged"}, "acquisition.");
    c.acquisition.n_f = a.value("n_f", c.acquisition.n_f);
    c.acquisition.span_mhz = a.value("span_mhz", c.acquisition.span_mhz);
    c.acquisition.contrast = a.value("contrast", c.acquisition.contrast);
    c.acquisition.linewidth_mhz = a.value("linewidth_mhz", c.acquisition.linewidth_mhz);
    c.acquisition.offset = a.value("offset", c.acquisition.offset);
    c.acquisition.noise_sigma = a.value("noise_sigma", c.acquisition.noise_sigma);
    c.acquisition.sweeps_averaged = a.value("sweeps_averaged", c.acquisition.sweeps_averaged);
  }
  c.acquisition.seed = c.seed;

  if (root.contains("fit")) {
    const json& f = root["fit"];
    reject_unknown(f, {"max_iterations", "tied", "max_nonconverged_fraction"}, "fit.");
    c.extract.fit.max_iterations = f.value("max_iterations", 200);
    c.extract.fit.tied = f.value("tied", false);
    c.extract.max_nonconverged_fraction =
        f.value("max_nonconverged_fraction", c.extract.max_nonconverged_fraction);
  }
  c.extract.threads = c.threads;

  if (root.contains("inversion")) {
    const json& iv = root["inversion"];
    reject_unknown(iv, {"pad_factor", "window_cutoff_um", "window", "taper_px",
                        "tikhonov", "standoff_um"}, "inversion.");
    c.inversion.pad_factor = iv.value("pad_factor", c.inversion.pad_factor);
    if (iv.contains("window_cutoff_um"))
      c.inversion.window_cutoff = um(iv["window_cutoff_um"].get<double>());
    c.inversion.window_kind = iv.value("window", c.inversion.window_kind);
    c.inversion.taper_px = iv.value("taper_px", c.inversion.taper_px);
    c.inversion.tikhonov = iv.value("tikhonov", c.inversion.tikhonov);
    if (iv.contains("standoff_um"))
      c.inversion_standoff = um(iv["standoff_um"].get<double>());
  }

  if (root.contains("calibration")) {
    const json& cal = root["calibration"];
    reject_unknown(cal, {"enabled", "fit_current", "transect_csv", "strip_index"},
                   "calibration.");
    c.calibration.enabled = cal.value("enabled", false);
    c.calibration.fit_current = cal.value("fit_current", false);
    c.calibration.transect_csv = cal.value("transect_csv", std::string());
    c.calibration.strip_index = cal.value("strip_index", 0);
  }

  if (root.contains("mirror")) {
    const json& m = root["mirror"];
    reject_unknown(m, {"wl_input", "wl_unit", "n_parallel", "i_in_ua"}, "mirror.");
    c.mirror.wl_input = m.value("wl_input", c.mirror.wl_input);
    c.mirror.wl_unit = m.value("wl_unit", c.mirror.wl_unit);
    c.mirror.n_parallel = m.value("n_parallel", c.mirror.n_parallel);
    if (m.contains("i_in_ua")) c.mirror.i_in = ua(m["i_in_ua"].get<double>());
  }

  for (const json& tj : root.value("taps", json::array())) {
    reject_unknown(tj, {"name", "transect_um", "band_count", "band_spacing_nm",
                        "multiplier"}, "taps[].");
    TapConfig t;
    t.name = tj.at("name").get<std::string>();
    const json& tr = tj.at("transect_um");
    if (!tr.is_array() || tr.size() != 2)
      throw ValidationError("config: taps[].transect_um must be [[x0,y0],[x1,y1]]");
    t.transect.p0 = um(1.0) * vec2(tr[0], "transect_um[0]");
    t.transect.p1 = um(1.0) * vec2(tr[1], "transect_um[1]");
    t.band_count = tj.value("band_count", t.band_count);
    if (tj.contains("band_spacing_nm"))
      t.band_spacing = nm(tj["band_spacing_nm"].get<double>());
    t.multiplier = tj.value("multiplier", 1.0);
    c.taps.push_back(std::move(t));
  }

  c.references_csv = root.value("references_csv", std::string());

  if (root.contains("io")) {
    const json& io = root["io"];
    reject_unknown(io, {"out_dir", "stack_minus", "stack_plus", "open_stack_minus",
                        "open_stack_plus"}, "io.");
    c.io.out_dir = io.value("out_dir", c.io.out_dir);
    c.io.stack_minus = io.value("stack_minus", c.io.stack_minus);
    c.io.stack_plus = io.value("stack_plus", c.io.stack_plus);
    c.io.open_stack_minus = io.value("open_stack_minus", std::string());
    c.io.open_stack_plus = io.value("open_stack_plus", std::string());
  }

  // referenced input files must exist at load time; relative paths are
  // resolved against the config file's directory
  const auto base = path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path(".");
  auto resolve_input = [&](std::string& rel, const char* what) {
    if (rel.empty()) return;
    const std::string p =
        std::filesystem::path(rel).is_absolute() ? rel : (base / rel).string();
    if (!std::filesystem::exists(p))
      throw ValidationError(std::string("config: ") + what + " '" + p + "' does not exist");
    rel = p;
  };
  resolve_input(c.references_csv, "references_csv");
  resolve_input(c.calibration.transect_csv, "calibration.transect_csv");

  c.validate();
  return c;
}

uint64_t config_hash(const std::filesystem::path& path) {
  const json root = parse_file(path);
  return fnv1a64(root.dump());  // sorted keys, no whitespace: canonical
}

}  // namespace qdm
