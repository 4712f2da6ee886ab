#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdm/forward_model.hpp"
#include "qdm/inversion.hpp"
#include "qdm/pipeline.hpp"

using namespace qdm;

namespace {

NvSensorParams paper_sensor() { return NvSensorParams{}; }

StripGeometry table1_strip() {
  StripGeometry s;
  s.width = 9.5e-6;
  s.standoff = 2.3e-6;
  s.current = 750e-6;
  s.axis = {0.0, -1.0};  // region-A current flows along -y
  return s;
}

// pixel-center aligned x coordinate for Grid2D::centered(256, ...) grids
double centered_x(const Grid2D& g, int i) { return g.origin.x() + i * g.pitch; }

}  // namespace

TEST_CASE("strip round trip: forward -> invert -> integrate recovers -750 uA within 2%") {
  const StripGeometry strip = table1_strip();
  const NvSensorParams p = paper_sensor();
  const Grid2D g = Grid2D::centered(256, 256, 260e-9);

  const ScalarRaster b = averaged_bnv_map(strip, g, p, 33);
  const CurrentDensityMap kmap = invert_bnv(b, p, strip.standoff);

  // local transect across the strip, pixel-center aligned, ~3w per side
  Transect t;
  t.p0 = {centered_x(g, 73), 0.0};   // ~ -14.2 um
  t.p1 = {centered_x(g, 182), 0.0};  // ~ +14.2 um
  const TransectCurrent tc = integrate_current(kmap, t, 33);

  CHECK(tc.current < 0.0);  // flows along -y
  CHECK(std::abs(std::abs(tc.current) - 750e-6) / 750e-6 < 0.02);
  CHECK(tc.std < 0.05 * std::abs(tc.current));

  SUBCASE("continuity holds on every retained mode") {
    CHECK(kmap.max_continuity_residual < 1e-8);
  }
  SUBCASE("direction signs follow the current") {
    // Ky < 0 over the conductor interior for -y current
    const int cx = 128, cy = 128;
    CHECK(kmap.ky.values(cx, cy) < 0.0);
    StripGeometry up = strip;
    up.axis = {0.0, 1.0};
    const ScalarRaster b_up = averaged_bnv_map(up, g, p, 33);
    const CurrentDensityMap kmap_up = invert_bnv(b_up, p, strip.standoff);
    CHECK(kmap_up.ky.values(cx, cy) > 0.0);
  }
  SUBCASE("scaling: invert(2b) = 2 invert(b) pixelwise") {
    const ScalarRaster b2(b.grid, b.unit, 2.0 * b.values);
    const CurrentDensityMap k2 = invert_bnv(b2, p, strip.standoff);
    const double scale = kmap.ky.values.abs().maxCoeff();
    CHECK(((k2.ky.values - 2.0 * kmap.ky.values).abs() < 1e-9 * scale).all());
    CHECK(((k2.kx.values - 2.0 * kmap.kx.values).abs() < 1e-9 * scale).all());
  }
  SUBCASE("stand-off sensitivity regression: h' = 1.5h") {
    // pinned from a reference run so kernel changes are caught: using 1.5x
    // the true stand-off inflates the recovered current by ~18.5%
    const CurrentDensityMap k15 = invert_bnv(b, p, 1.5 * strip.standoff);
    const TransectCurrent tc15 = integrate_current(k15, t, 33);
    const double ratio = tc15.current / tc.current;
    CHECK(ratio == doctest::Approx(1.185).epsilon(0.01));
  }
}

TEST_CASE("zero map inverts to zero, not an error") {
  const Grid2D g = Grid2D::centered(64, 64, 260e-9);
  const ScalarRaster zero = raster_new(g, Unit::Tesla, 0.0);
  const CurrentDensityMap kmap = invert_bnv(zero, paper_sensor(), 2.3e-6);
  CHECK((kmap.kx.values == 0.0).all());
  CHECK((kmap.ky.values == 0.0).all());
  CHECK((kmap.kmag.values == 0.0).all());
}

TEST_CASE("kmag is the pixelwise magnitude") {
  const StripGeometry strip = table1_strip();
  const Grid2D g = Grid2D::centered(64, 64, 1e-6);
  const ScalarRaster b = averaged_bnv_map(strip, g, paper_sensor(), 9);
  const CurrentDensityMap kmap = invert_bnv(b, paper_sensor(), strip.standoff);
  const Eigen::ArrayXXd want =
      (kmap.kx.values.square() + kmap.ky.values.square()).sqrt();
  CHECK((kmap.kmag.values == want).all());
}

TEST_CASE("invert_bnv input validation") {
  const Grid2D g(16, 16, 1e-6);
  const ScalarRaster b = raster_new(g, Unit::Tesla, 1e-6);
  const NvSensorParams p = paper_sensor();
  CHECK_THROWS_AS(invert_bnv(b, p, 0.0), ValidationError);
  CHECK_THROWS_AS(invert_bnv(raster_new(g, Unit::AmperePerMeter, 1.0), p, 2e-6),
                  ValidationError);
  InversionOptions bad;
  bad.window_kind = "boxcar";
  CHECK_THROWS_AS(invert_bnv(b, p, 2e-6, bad), ValidationError);

  // pitch coarser than h/2 flags the resolution warning
  const ScalarRaster coarse = raster_new(Grid2D(16, 16, 2e-6), Unit::Tesla, 0.0);
  CHECK(invert_bnv(coarse, p, 2.3e-6).resolution_warning);
  CHECK(!invert_bnv(b, p, 2.3e-6).resolution_warning);
}

TEST_CASE("in-plane NV axis leaves only a measure-zero singular set") {
  NvSensorParams p = paper_sensor();
  p.theta = M_PI / 2.0;
  p.phi = 0.0;
  const Grid2D g = Grid2D::centered(32, 32, 1e-6);
  const ScalarRaster b = raster_new(g, Unit::Tesla, 0.0);
  const CurrentDensityMap kmap = invert_bnv(b, p, 2.3e-6);
  CHECK(kmap.singular_mode_fraction > 0.0);
  CHECK(kmap.singular_mode_fraction < 0.05);
}

TEST_CASE("Tikhonov regularization stays close to the exact inverse") {
  const StripGeometry strip = table1_strip();
  const Grid2D g = Grid2D::centered(128, 128, 520e-9);
  const ScalarRaster b = averaged_bnv_map(strip, g, paper_sensor(), 17);
  InversionOptions opts;
  const CurrentDensityMap k0 = invert_bnv(b, paper_sensor(), strip.standoff, opts);
  opts.tikhonov = 1e-16;
  const CurrentDensityMap k1 = invert_bnv(b, paper_sensor(), strip.standoff, opts);
  const double scale = k0.ky.values.abs().maxCoeff();
  CHECK(((k0.ky.values - k1.ky.values).abs() < 1e-2 * scale).all());
}

TEST_CASE("integrate_current reproduces the paper's mean-density arithmetic") {
  const NvSensorParams p = paper_sensor();

  SUBCASE("79.5 A/m x 9.5 um = 755.25 uA") {
    StripGeometry s;
    s.width = 9.5e-6;
    s.current = 79.5 * 9.5e-6;  // uniform 79.5 A/m
    s.axis = {0.0, 1.0};
    const Grid2D g = Grid2D::centered(256, 32, 260e-9);
    CurrentDensityMap kmap = make_strip_k_map(s, g);
    Transect t;
    t.p0 = {centered_x(g, 73), 0.0};
    t.p1 = {centered_x(g, 182), 0.0};
    const TransectCurrent tc = integrate_current(kmap, t, 1);
    CHECK(std::abs(tc.current - 755.25e-6) / 755.25e-6 < 1e-3);
    // the 10% support includes the antialiased edge samples, so the mean
    // sits slightly below the plateau value
    CHECK(tc.mean_density == doctest::Approx(79.5).epsilon(0.07));
    CHECK(tc.mean_density <= 79.5 + 1e-9);
  }

  SUBCASE("17.3 A/m x 15.5 um = 268.15 uA") {
    StripGeometry s;
    s.width = 15.5e-6;
    s.current = 17.3 * 15.5e-6;
    s.axis = {0.0, 1.0};
    const Grid2D g = Grid2D::centered(256, 32, 260e-9);
    CurrentDensityMap kmap = make_strip_k_map(s, g);
    Transect t;
    t.p0 = {centered_x(g, 53), 0.0};
    t.p1 = {centered_x(g, 202), 0.0};
    const TransectCurrent tc = integrate_current(kmap, t, 1);
    CHECK(std::abs(tc.current - 268.15e-6) / 268.15e-6 < 1e-3);
  }

  SUBCASE("zero map integrates to zero") {
    const Grid2D g = Grid2D::centered(64, 16, 260e-9);
    CurrentDensityMap kmap;
    kmap.kx = raster_new(g, Unit::AmperePerMeter, 0.0);
    kmap.ky = raster_new(g, Unit::AmperePerMeter, 0.0);
    kmap.kmag = raster_new(g, Unit::AmperePerMeter, 0.0);
    Transect t;
    t.p0 = {centered_x(g, 5), 0.0};
    t.p1 = {centered_x(g, 58), 0.0};
    CHECK(integrate_current(kmap, t, 5).current == 0.0);
  }

  SUBCASE("short transects are rejected") {
    const Grid2D g = Grid2D::centered(64, 16, 260e-9);
    CurrentDensityMap kmap;
    kmap.kx = raster_new(g, Unit::AmperePerMeter, 0.0);
    kmap.ky = raster_new(g, Unit::AmperePerMeter, 0.0);
    kmap.kmag = raster_new(g, Unit::AmperePerMeter, 0.0);
    Transect t;
    t.p0 = {0.0, 0.0};
    t.p1 = {2.0 * g.pitch, 0.0};
    CHECK_THROWS_AS(integrate_current(kmap, t, 1), ValidationError);
  }
}

TEST_CASE("vector_glyphs thresholding and stride") {
  StripGeometry s;
  s.width = 4e-6;
  s.current = 100e-6;  // 25 A/m
  s.axis = {0.0, 1.0};
  const Grid2D g = Grid2D::centered(32, 32, 1e-6);
  const CurrentDensityMap kmap = make_strip_k_map(s, g);

  CHECK(vector_glyphs(kmap, kmap.kmag.values.maxCoeff() + 1.0, 1).empty());

  // a ribbon covering the whole grid: one glyph per pixel at threshold 0
  StripGeometry wide = s;
  wide.width = 40e-6;
  wide.current = 40e-6 * 2.5;
  const CurrentDensityMap full = make_strip_k_map(wide, g);
  CHECK(vector_glyphs(full, 0.0, 1).size() == 32 * 32);
  CHECK(vector_glyphs(full, 0.0, 4).size() == 8 * 8);

  const auto strided = vector_glyphs(kmap, 0.0, 4);
  CHECK(strided.size() < size_t(32 * 32));
  for (const auto& gl : strided) {
    CHECK(gl.vector.x() == 0.0);
    CHECK(gl.vector.y() > 0.0);
  }
  CHECK_THROWS_AS(vector_glyphs(kmap, -1.0, 1), ValidationError);
  CHECK_THROWS_AS(vector_glyphs(kmap, 0.0, 0), ValidationError);
}
