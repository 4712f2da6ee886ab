#include "qdm/forward_model.hpp"

#include <cmath>

#include "qdm/quadrature.hpp"

namespace qdm {

FieldSample strip_field(const StripGeometry& strip, double x, double l) {
  strip.validate();
  const double d = l + strip.standoff;
  require(d >= 0.0, "strip_field: observation point above the conductor plane");
  const double w = strip.width;
  const double xp = x + 0.5 * w;
  const double xm = x - 0.5 * w;
  if (d == 0.0) {
    require(xp != 0.0 && xm != 0.0,
            "strip_field: singular geometry (in the conductor plane at a strip edge)");
  }
  const double pref = kMu0 * strip.current / (2.0 * M_PI * w);
  const double bz_local =
      -0.5 * pref * std::log((d * d + xp * xp) / (d * d + xm * xm));
  const double bx_local = pref * (std::atan2(xm, d) - std::atan2(xp, d));

  const Eigen::Vector2d n = strip.normal();
  FieldSample out;
  out.bx = bx_local * n.x();
  out.by = bx_local * n.y();
  out.bz = bz_local;
  return out;
}

void strip_field_map(const StripGeometry& strip, const Grid2D& grid, double l,
                     ScalarRaster& bx, ScalarRaster& by, ScalarRaster& bz) {
  grid.validate();
  bx = raster_new(grid, Unit::Tesla, 0.0);
  by = raster_new(grid, Unit::Tesla, 0.0);
  bz = raster_new(grid, Unit::Tesla, 0.0);
  const Eigen::Vector2d n = strip.normal();
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const Eigen::Vector2d p = grid.point_at(ix, iy);
      const double xloc = (p - strip.center).dot(n);
      const FieldSample f = strip_field(strip, xloc, l);
      bx.values(ix, iy) = f.bx;
      by.values(ix, iy) = f.by;
      bz.values(ix, iy) = f.bz;
    }
  }
}

namespace {

struct Filament {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
};

// Field of a finite straight filament carrying `cur` from a to b, at p.
inline Eigen::Vector3d finite_segment_field(const Eigen::Vector3d& a,
                                            const Eigen::Vector3d& b,
                                            double cur,
                                            const Eigen::Vector3d& p) {
  const Eigen::Vector3d u = (b - a).normalized();
  const Eigen::Vector3d r1 = p - a;
  const Eigen::Vector3d r2 = p - b;
  const Eigen::Vector3d uxr = u.cross(r1);  // constant along the filament
  const double rho2 = uxr.squaredNorm();
  if (rho2 == 0.0) return Eigen::Vector3d::Zero();  // on the filament axis
  const double f = r1.dot(u) / r1.norm() - r2.dot(u) / r2.norm();
  return (kMu0 * cur / (4.0 * M_PI)) * (f / rho2) * uxr;
}

// Filament endpoints for one ribbon segment at lateral offset t, with miter
// trimming against the neighbor segments at interior vertices.
Filament ribbon_filament(const std::vector<Eigen::Vector2d>& v,
                         const std::vector<Eigen::Vector2d>& u, size_t i,
                         double t) {
  auto rot90 = [](const Eigen::Vector2d& a) {
    return Eigen::Vector2d(-a.y(), a.x());
  };
  auto cross2 = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
  };
  const Eigen::Vector2d n = rot90(u[i]);
  Eigen::Vector2d p = v[i] + t * n;
  Eigen::Vector2d q = v[i + 1] + t * n;
  if (i > 0) {
    const double cr = cross2(u[i], u[i - 1]);
    if (std::abs(cr) > 1e-12) {
      const Eigen::Vector2d pa = v[i] + t * rot90(u[i - 1]);
      p += (cross2(pa - p, u[i - 1]) / cr) * u[i];
    }
  }
  if (i + 1 < u.size()) {
    const double cr = cross2(u[i], u[i + 1]);
    if (std::abs(cr) > 1e-12) {
      const Eigen::Vector2d pb = v[i + 1] + t * rot90(u[i + 1]);
      q += (cross2(pb - q, u[i + 1]) / cr) * u[i];
    }
  }
  Filament f;
  f.a = {p.x(), p.y(), 0.0};
  f.b = {q.x(), q.y(), 0.0};
  return f;
}

std::vector<Filament> ribbon_filaments(const CurrentPath& path, int n_width) {
  path.validate();
  require(n_width >= 1, "polyline_field: n_width must be >= 1");
  const auto& v = path.vertices;
  std::vector<Eigen::Vector2d> u(v.size() - 1);
  for (size_t i = 0; i + 1 < v.size(); ++i) u[i] = (v[i + 1] - v[i]).normalized();
  for (size_t i = 1; i < u.size(); ++i) {
    // reject near-reversals where the miter cap degenerates
    require(u[i - 1].dot(u[i]) > -0.9,
            "CurrentPath: turn angle too sharp for a miter join");
  }
  std::vector<Filament> fs;
  fs.reserve(u.size() * n_width);
  for (size_t i = 0; i < u.size(); ++i) {
    for (int k = 0; k < n_width; ++k) {
      const double t = (-0.5 + (k + 0.5) / n_width) * path.width;
      fs.push_back(ribbon_filament(v, u, i, t));
    }
  }
  return fs;
}

}  // namespace

FieldSample polyline_field(const CurrentPath& path, const Eigen::Vector2d& p,
                           double l, int n_width) {
  const auto fils = ribbon_filaments(path, n_width);
  const double d = l + path.standoff;
  require(d >= 0.0, "polyline_field: observation point above the conductor plane");
  const double cur = path.current / n_width;
  const Eigen::Vector3d obs(p.x(), p.y(), -d);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (const auto& f : fils) acc += finite_segment_field(f.a, f.b, cur, obs);
  return {acc.x(), acc.y(), acc.z()};
}

void polyline_field_map(const CurrentPath& path, const Grid2D& grid, double l,
                        ScalarRaster& bx, ScalarRaster& by, ScalarRaster& bz,
                        int n_width) {
  grid.validate();
  const auto fils = ribbon_filaments(path, n_width);
  const double d = l + path.standoff;
  require(d >= 0.0, "polyline_field_map: observation plane above the conductor");
  const double cur = path.current / n_width;
  bx = raster_new(grid, Unit::Tesla, 0.0);
  by = raster_new(grid, Unit::Tesla, 0.0);
  bz = raster_new(grid, Unit::Tesla, 0.0);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const Eigen::Vector2d p = grid.point_at(ix, iy);
      const Eigen::Vector3d obs(p.x(), p.y(), -d);
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      for (const auto& f : fils) acc += finite_segment_field(f.a, f.b, cur, obs);
      bx.values(ix, iy) = acc.x();
      by.values(ix, iy) = acc.y();
      bz.values(ix, iy) = acc.z();
    }
  }
}

ScalarRaster project_nv(const ScalarRaster& bx, const ScalarRaster& by,
                        const ScalarRaster& bz, const NvSensorParams& params) {
  params.validate();
  require_coregistered(bx, by, "project_nv");
  require_coregistered(bx, bz, "project_nv");
  require(bx.unit == Unit::Tesla && by.unit == Unit::Tesla && bz.unit == Unit::Tesla,
          "project_nv: inputs must be tesla rasters");
  const Eigen::Vector3d n = params.axis();
  return ScalarRaster(bx.grid, Unit::Tesla,
                      bx.values * n.x() + by.values * n.y() + bz.values * n.z());
}

namespace {

template <typename MapFn>
ScalarRaster averaged_bnv_impl(const Grid2D& grid, const NvSensorParams& params,
                               int quadrature_n, MapFn field_at_depth) {
  params.validate();
  ScalarRaster acc = raster_new(grid, Unit::Tesla, 0.0);
  if (params.h_nv == 0.0) {
    ScalarRaster bx, by, bz;
    field_at_depth(0.0, bx, by, bz);
    return project_nv(bx, by, bz, params);
  }
  const SimpsonRule rule = simpson_rule(params.h_nv, quadrature_n);
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    ScalarRaster bx, by, bz;
    field_at_depth(rule.nodes[i], bx, by, bz);
    const ScalarRaster bnv = project_nv(bx, by, bz, params);
    acc.values += (rule.weights[i] / params.h_nv) * bnv.values;
  }
  acc.validate();
  return acc;
}

}  // namespace

ScalarRaster averaged_bnv_map(const StripGeometry& strip, const Grid2D& grid,
                              const NvSensorParams& params, int quadrature_n) {
  return averaged_bnv_impl(grid, params, quadrature_n,
                           [&](double l, ScalarRaster& bx, ScalarRaster& by,
                               ScalarRaster& bz) {
                             strip_field_map(strip, grid, l, bx, by, bz);
                           });
}

ScalarRaster averaged_bnv_map(const CurrentPath& path, const Grid2D& grid,
                              const NvSensorParams& params, int quadrature_n,
                              int n_width) {
  return averaged_bnv_impl(grid, params, quadrature_n,
                           [&](double l, ScalarRaster& bx, ScalarRaster& by,
                               ScalarRaster& bz) {
                             polyline_field_map(path, grid, l, bx, by, bz, n_width);
                           });
}

}  // namespace qdm
