#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qdm/forward_model.hpp"
#include "qdm/quadrature.hpp"

using namespace qdm;

namespace {

StripGeometry region_a_strip() {
  StripGeometry s;
  s.width = 9.5e-6;
  s.standoff = 2.3e-6;
  s.current = 750e-6;
  s.axis = {0.0, 1.0};
  return s;
}

NvSensorParams paper_sensor() {
  NvSensorParams p;  // defaults are the paper values
  return p;
}

}  // namespace

TEST_CASE("strip field vanishes on the centerline (Bz) and is odd/even in x") {
  const StripGeometry s = region_a_strip();
  CHECK(strip_field(s, 0.0, 1e-6).bz == 0.0);

  for (double x : {1e-6, 3e-6, 7.5e-6, 20e-6}) {
    const FieldSample plus = strip_field(s, x, 0.5e-6);
    const FieldSample minus = strip_field(s, -x, 0.5e-6);
    CHECK(plus.bz == doctest::Approx(-minus.bz).epsilon(1e-12));  // odd
    CHECK(plus.bx == doctest::Approx(minus.bx).epsilon(1e-12));   // even
    CHECK(plus.by == 0.0);
  }
}

TEST_CASE("wide-strip limit: Bx(0) -> -mu0 I / (2w)") {
  StripGeometry s;
  s.current = 1e-3;
  s.standoff = 1e-6;
  s.width = 1e4 * (s.standoff);  // w / (l+h) = 1e4
  const FieldSample f = strip_field(s, 0.0, 0.0);
  const double sheet = -kMu0 * s.current / (2.0 * s.width);
  CHECK(f.bx == doctest::Approx(sheet).epsilon(1e-3));
}

TEST_CASE("sign convention: +y current gives Bz < 0 for x > 0") {
  const StripGeometry s = region_a_strip();
  CHECK(strip_field(s, 2e-6, 0.0).bz < 0.0);
  CHECK(strip_field(s, -2e-6, 0.0).bz > 0.0);
  // and the below-sheet Bx is negative at the center
  CHECK(strip_field(s, 0.0, 0.0).bx < 0.0);
}

TEST_CASE("strip_field matches the filament oracle to 1e-6 (paper geometries)") {
  for (auto [w, h] : {std::pair{9.5e-6, 2.3e-6}, std::pair{15.5e-6, 2.8e-6}}) {
    StripGeometry s;
    s.width = w;
    s.standoff = h;
    s.current = 750e-6;
    double bmax = 0.0;
    std::vector<std::array<double, 4>> samples;  // x, l, bx, bz
    for (int i = -30; i <= 30; ++i) {
      const double x = i * w / 10.0;  // |x| <= 3w
      for (double l : {0.0, 0.625e-6, 1.25e-6, 1.875e-6, 2.5e-6}) {
        const FieldSample f = strip_field(s, x, l);
        samples.push_back({x, l, f.bx, f.bz});
        bmax = std::max({bmax, std::abs(f.bx), std::abs(f.bz)});
      }
    }
    for (const auto& [x, l, bx, bz] : samples) {
      const auto o = oracles::strip_filaments(s.current, w, x, l + h);
      CHECK(std::abs(bx - o.bx) / bmax < 1e-6);
      CHECK(std::abs(bz - o.bz) / bmax < 1e-6);
    }
  }
}

TEST_CASE("quadrature oracle at the Table-1 operating point") {
  // I = 750 uA, w = 9.5 um, h = 2.3 um, l = 0, x = 0
  const StripGeometry s = region_a_strip();
  const FieldSample f = strip_field(s, 0.0, 0.0);
  const auto o = oracles::strip_filaments(s.current, s.width, 0.0, s.standoff);
  CHECK(std::abs(f.bx - o.bx) / std::abs(o.bx) < 1e-6);
}

TEST_CASE("strip_field singular geometry and frame rotation") {
  StripGeometry s = region_a_strip();
  s.standoff = 0.0;
  CHECK_THROWS_AS(strip_field(s, 0.5 * s.width, 0.0), ValidationError);
  CHECK_NOTHROW(strip_field(s, 0.4 * s.width, 0.0));  // inside the sheet: finite

  // axis (0,-1): normal is (-1, 0), so the in-plane field flips sign
  StripGeometry down = region_a_strip();
  down.axis = {0.0, -1.0};
  const FieldSample up_f = strip_field(region_a_strip(), 1e-6, 0.0);
  const FieldSample dn_f = strip_field(down, 1e-6, 0.0);
  CHECK(dn_f.bx == doctest::Approx(-up_f.bx).epsilon(1e-12));
}

TEST_CASE("field decays monotonically into the far zone") {
  const StripGeometry s = region_a_strip();
  auto mag = [&](double x) {
    const FieldSample f = strip_field(s, x, 0.0);
    return std::hypot(f.bx, f.bz);
  };
  CHECK(mag(10.0 * s.width) < mag(0.5 * s.width));
}

TEST_CASE("straight 2-vertex path reproduces the strip field") {
  const StripGeometry s = region_a_strip();
  CurrentPath path;
  path.width = s.width;
  path.current = s.current;
  path.standoff = s.standoff;
  path.vertices = {{0.0, -2e-3}, {0.0, 2e-3}};  // long, along +y

  const double l = 1e-6;
  double bmax = 0.0;
  std::vector<std::array<double, 3>> rows;
  for (int i = -12; i <= 12; ++i) {
    const double x = i * 1e-6;
    const FieldSample ref = strip_field(s, x, l);
    bmax = std::max({bmax, std::abs(ref.bx), std::abs(ref.bz)});
    rows.push_back({x, ref.bx, ref.bz});
  }
  for (const auto& [x, bx_ref, bz_ref] : rows) {
    const FieldSample f = polyline_field(path, {x, 0.0}, l, 256);
    CHECK(std::abs(f.bx - bx_ref) / bmax < 1e-3);
    CHECK(std::abs(f.bz - bz_ref) / bmax < 1e-3);
    CHECK(std::abs(f.by) / bmax < 1e-3);
  }
}

TEST_CASE("polyline field is linear in the current and zero for zero current") {
  CurrentPath path;
  path.width = 4e-6;
  path.current = 0.0;
  path.standoff = 2e-6;
  path.vertices = {{-20e-6, 0.0}, {0.0, 0.0}, {0.0, 20e-6}};

  const Grid2D grid = Grid2D::centered(16, 16, 2e-6);
  ScalarRaster bx, by, bz;
  polyline_field_map(path, grid, 0.0, bx, by, bz, 16);
  CHECK((bx.values == 0.0).all());
  CHECK((by.values == 0.0).all());
  CHECK((bz.values == 0.0).all());

  path.current = 300e-6;
  ScalarRaster bx1, by1, bz1, bx2, by2, bz2;
  polyline_field_map(path, grid, 0.0, bx1, by1, bz1, 16);
  CurrentPath doubled = path;
  doubled.current = 600e-6;
  polyline_field_map(doubled, grid, 0.0, bx2, by2, bz2, 16);
  CHECK(((bx2.values - 2.0 * bx1.values).abs() < 1e-9 * bx1.values.abs().maxCoeff()).all());
  CHECK(((bz2.values - 2.0 * bz1.values).abs() < 1e-9 * bz1.values.abs().maxCoeff()).all());
}

TEST_CASE("polyline ribbon matches the independent segment-quadrature oracle") {
  CurrentPath a;
  a.width = 5e-6;
  a.standoff = 2e-6;
  a.current = 200e-6;
  a.vertices = {{-30e-6, -4e-6}, {30e-6, -4e-6}};

  const Eigen::Vector2d p{1.5e-6, 2.5e-6};
  const double l = 0.5e-6;
  const FieldSample fa = polyline_field(a, p, l, 64);

  Eigen::Vector3d oa = Eigen::Vector3d::Zero();
  const int nw = 64;
  const double d = l + a.standoff;
  for (int k = 0; k < nw; ++k) {
    const double t = (-0.5 + (k + 0.5) / nw) * a.width;
    // ribbon along +x; lateral offset is along -y for this direction
    oa += oracles::segment_quadrature({-30e-6, -4e-6 + t, 0.0},
                                      {30e-6, -4e-6 + t, 0.0}, a.current / nw,
                                      {p.x(), p.y(), -d});
  }
  CHECK(fa.bx == doctest::Approx(oa.x()).epsilon(2e-4));
  CHECK(fa.by == doctest::Approx(oa.y()).epsilon(2e-4));
  CHECK(fa.bz == doctest::Approx(oa.z()).epsilon(2e-4));
}

TEST_CASE("project_nv axis special cases") {
  const Grid2D grid(8, 8, 1e-6);
  ScalarRaster bx = raster_new(grid, Unit::Tesla, 0.0);
  ScalarRaster by = raster_new(grid, Unit::Tesla, 0.0);
  ScalarRaster bz = raster_new(grid, Unit::Tesla, 0.0);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      bx.values(i, j) = 0.1 * i - 0.3 * j;
      by.values(i, j) = 0.7 * i + 0.01 * j;
      bz.values(i, j) = -0.2 * i + 0.05 * j;
    }

  NvSensorParams p = paper_sensor();
  p.theta = 0.0;  // polar axis: output = Bz
  CHECK((project_nv(bx, by, bz, p).values == bz.values).all());

  p.theta = M_PI / 2.0;
  p.phi = 0.0;  // in-plane x axis: output = Bx
  const ScalarRaster px = project_nv(bx, by, bz, p);
  CHECK(((px.values - bx.values).abs() < 1e-15).all());
}

TEST_CASE("project_nv matches a per-pixel dot product for a [111]-like axis") {
  const Grid2D grid(16, 16, 1e-6);
  ScalarRaster bx = raster_new(grid, Unit::Tesla, 0.0);
  ScalarRaster by = raster_new(grid, Unit::Tesla, 0.0);
  ScalarRaster bz = raster_new(grid, Unit::Tesla, 0.0);
  // deterministic pseudo-random fields
  uint64_t s = 42;
  auto next = [&s]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) / static_cast<double>(1ULL << 53) - 0.5;
  };
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      bx.values(i, j) = next();
      by.values(i, j) = next();
      bz.values(i, j) = next();
    }

  NvSensorParams p = paper_sensor();  // theta = acos(1/sqrt(3)), phi = pi/4
  const ScalarRaster out = project_nv(bx, by, bz, p);
  const Eigen::Vector3d n = p.axis();
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      const double dot = bx.values(i, j) * n.x() + by.values(i, j) * n.y() +
                         bz.values(i, j) * n.z();
      CHECK(out.values(i, j) == doctest::Approx(dot).epsilon(1e-14));
    }

  const ScalarRaster wrong_grid = raster_new(Grid2D(8, 8, 1e-6), Unit::Tesla, 0.0);
  CHECK_THROWS_AS(project_nv(bx, by, wrong_grid, p), ValidationError);
}

TEST_CASE("layer_average: constant and linear integrands") {
  NvSensorParams p = paper_sensor();
  const auto const_avg = layer_average([](double, double) { return 3.7; }, p.h_nv);
  CHECK(const_avg(0.0) == doctest::Approx(3.7).epsilon(1e-15));

  const double c = 4.2e5;
  const auto lin_avg = layer_average([c](double, double l) { return c * l; }, p.h_nv);
  CHECK(lin_avg(0.0) == doctest::Approx(c * p.h_nv / 2.0).epsilon(1e-14));
}

TEST_CASE("layer_average quadrature refinement study") {
  const StripGeometry s = region_a_strip();
  const NvSensorParams p = paper_sensor();
  auto bnv = [&](double x, double l) {
    const FieldSample f = strip_field(s, x, l);
    const Eigen::Vector3d n = p.axis();
    return f.bx * n.x() + f.by * n.y() + f.bz * n.z();
  };
  const auto coarse = layer_average(bnv, p.h_nv, 17);
  const auto fine = layer_average(bnv, p.h_nv, 257);
  for (double x : {0.0, 2e-6, 5e-6, 9e-6}) {
    CHECK(std::abs(coarse(x) - fine(x)) / std::abs(fine(x)) < 1e-4);
  }
}

TEST_CASE("layer_average handles h_nv = 0 as the surface value") {
  auto f = [](double x, double l) { return x + 100.0 * l; };
  const auto avg = layer_average(f, 0.0);
  CHECK(avg(1.5) == 1.5);
}
