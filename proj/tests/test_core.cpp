#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdm/raster.hpp"
#include "qdm/sensor.hpp"

using namespace qdm;

TEST_CASE("raster_new fills uniformly") {
  const ScalarRaster r = raster_new(Grid2D(4, 4, 1e-6), Unit::Tesla, 0.0);
  CHECK(r.values.size() == 16);
  CHECK((r.values == 0.0).all());

  const ScalarRaster one = raster_new(Grid2D(1, 1, 1e-6), Unit::Dimensionless, 2.5);
  CHECK(one.values(0, 0) == 2.5);
}

TEST_CASE("raster pixel coordinates") {
  const Grid2D g(3, 2, 260e-9);
  const ScalarRaster r = raster_new(g, Unit::Tesla, 1e-6);
  CHECK(r.values.size() == 6);
  CHECK((r.values == 1e-6).all());
  const Eigen::Vector2d p = g.point_at(2, 1);
  CHECK(p.x() == doctest::Approx(520e-9).epsilon(1e-15));
  CHECK(p.y() == doctest::Approx(260e-9).epsilon(1e-15));
}

TEST_CASE("grid coordinate round trip is exact at pixel centers") {
  const Grid2D g(64, 48, 260e-9, {-3.2e-6, 1.7e-6});
  for (int iy : {0, 1, 13, 47}) {
    for (int ix : {0, 7, 33, 63}) {
      const Eigen::Vector2d idx = g.index_of(g.point_at(ix, iy));
      CHECK(idx.x() == doctest::Approx(ix).epsilon(1e-12));
      CHECK(idx.y() == doctest::Approx(iy).epsilon(1e-12));
    }
  }
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(Grid2D(0, 4, 1e-6), ValidationError);
  CHECK_THROWS_AS(Grid2D(4, 4, 0.0), ValidationError);
  CHECK_THROWS_AS(raster_new(Grid2D(4, 4, 1e-6), Unit::Tesla,
                             std::numeric_limits<double>::quiet_NaN()),
                  ValidationError);
}

TEST_CASE("rasters reject NaN and shape mismatches") {
  Eigen::ArrayXXd bad = Eigen::ArrayXXd::Zero(4, 4);
  bad(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(ScalarRaster(Grid2D(4, 4, 1e-6), Unit::Tesla, bad), ValidationError);
  CHECK_THROWS_AS(ScalarRaster(Grid2D(4, 3, 1e-6), Unit::Tesla,
                               Eigen::ArrayXXd::Zero(4, 4)),
                  ValidationError);
}

TEST_CASE("unit mixing is rejected without explicit conversion") {
  const ScalarRaster t = raster_new(Grid2D(2, 2, 1e-6), Unit::Tesla, 1.0);
  const ScalarRaster k = raster_new(Grid2D(2, 2, 1e-6), Unit::AmperePerMeter, 1.0);
  CHECK_THROWS_AS(subtract(t, k), ValidationError);
  const ScalarRaster other_grid = raster_new(Grid2D(3, 2, 1e-6), Unit::Tesla, 1.0);
  CHECK_THROWS_AS(subtract(t, other_grid), ValidationError);
}

TEST_CASE("resonance_pair matches D +- gamma B") {
  NvSensorParams p;
  p.d_mhz = 2870.0;
  p.gamma_mhz_per_mt = 28.0;

  SUBCASE("zero field") {
    const auto [fm, fp] = resonance_pair(p, 0.0);
    CHECK(fm == 2870.0);
    CHECK(fp == 2870.0);
  }
  SUBCASE("2 mT") {
    const auto [fm, fp] = resonance_pair(p, 2.0);
    CHECK(fm == doctest::Approx(2814.0).epsilon(1e-15));
    CHECK(fp == doctest::Approx(2926.0).epsilon(1e-15));
    CHECK(fp - fm == doctest::Approx(2.0 * 28.0 * 2.0).epsilon(1e-15));
  }
  SUBCASE("algebraic round trip") {
    const auto [fm, fp] = resonance_pair(p, 1.37);
    CHECK(field_from_resonances(p, fm, fp) == doctest::Approx(1.37).epsilon(1e-14));
  }
}

TEST_CASE("resonance_pair is linear in the field") {
  NvSensorParams p;
  for (double b : {-1.3, 0.2, 2.7}) {
    for (double a : {-2.0, 0.5, 3.0}) {
      const auto [fm_b, fp_b] = resonance_pair(p, b);
      const auto [fm_ab, fp_ab] = resonance_pair(p, a * b);
      CHECK(fp_ab - p.d_mhz == doctest::Approx(a * (fp_b - p.d_mhz)).epsilon(1e-12));
      CHECK(fm_ab - p.d_mhz == doctest::Approx(a * (fm_b - p.d_mhz)).epsilon(1e-12));
    }
  }
}

TEST_CASE("resonance_pair rejects the anticrossing regime") {
  NvSensorParams p;
  CHECK_THROWS_AS(resonance_pair(p, 2870.0 / 28.0), ValidationError);
  CHECK_THROWS_AS(resonance_pair(p, -2000.0), ValidationError);
}
