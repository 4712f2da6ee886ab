#include "qdm/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "qdm/io.hpp"

namespace qdm {

namespace {

struct Rgb {
  unsigned char r, g, b;
};

Rgb diverging_color(double t) {  // 0 -> blue, 0.5 -> white, 1 -> red
  t = std::clamp(t, 0.0, 1.0);
  auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
  double r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = lerp(0.13, 1.0, u);
    g = lerp(0.30, 1.0, u);
    b = lerp(0.75, 1.0, u);
  } else {
    const double u = (t - 0.5) / 0.5;
    r = lerp(1.0, 0.75, u);
    g = lerp(1.0, 0.14, u);
    b = lerp(1.0, 0.16, u);
  }
  return {static_cast<unsigned char>(std::lround(255 * r)),
          static_cast<unsigned char>(std::lround(255 * g)),
          static_cast<unsigned char>(std::lround(255 * b))};
}

Rgb gray_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto v = static_cast<unsigned char>(std::lround(255 * t));
  return {v, v, v};
}

void draw_line(std::vector<unsigned char>& img, int w, int h, int x0, int y0,
               int x1, int y1) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && x0 < w && y0 >= 0 && y0 < h) {
      const size_t at = 3 * (static_cast<size_t>(y0) * w + x0);
      img[at] = img[at + 1] = img[at + 2] = 0;
    }
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

}  // namespace

HeatmapScale auto_scale(const ScalarRaster& r) {
  HeatmapScale s;
  const double lo = r.values.minCoeff();
  const double hi = r.values.maxCoeff();
  if (lo < 0.0 && hi > 0.0) {
    const double m = std::max(-lo, hi);
    s.min = -m;
    s.max = m;
    s.colormap = "diverging";
  } else {
    s.min = lo;
    s.max = hi;
    s.colormap = "gray";
  }
  return s;
}

int emit_heatmap(const ScalarRaster& raster, const HeatmapScale& scale,
                 const std::filesystem::path& path,
                 const std::vector<Glyph>& glyphs) {
  raster.validate();
  require(scale.colormap == "diverging" || scale.colormap == "gray",
          "emit_heatmap: unknown colormap '" + scale.colormap + "'");
  const bool constant =
      raster.values.maxCoeff() == raster.values.minCoeff();
  require(scale.max > scale.min || constant,
          "emit_heatmap: degenerate scale (min = max) for a non-constant raster");

  const int nx = raster.grid.nx, ny = raster.grid.ny;
  std::vector<unsigned char> img(3 * static_cast<size_t>(nx) * ny);
  const double span = scale.max - scale.min;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = raster.values(ix, iy);
      const double t = span > 0.0 ? (v - scale.min) / span : 0.5;
      const Rgb c = scale.colormap == "diverging" ? diverging_color(t) : gray_color(t);
      const int row = ny - 1 - iy;  // y up
      const size_t at = 3 * (static_cast<size_t>(row) * nx + ix);
      img[at] = c.r;
      img[at + 1] = c.g;
      img[at + 2] = c.b;
    }
  }

  int drawn = 0;
  if (!glyphs.empty()) {
    double vmax = 0.0;
    for (const auto& g : glyphs) vmax = std::max(vmax, g.vector.norm());
    const double px_per_unit = vmax > 0.0 ? 0.05 * nx / vmax : 0.0;
    for (const auto& g : glyphs) {
      const Eigen::Vector2d i0 = raster.grid.index_of(g.position);
      const Eigen::Vector2d i1 = i0 + px_per_unit * g.vector;
      draw_line(img, nx, ny, static_cast<int>(std::lround(i0.x())),
                ny - 1 - static_cast<int>(std::lround(i0.y())),
                static_cast<int>(std::lround(i1.x())),
                ny - 1 - static_cast<int>(std::lround(i1.y())));
      ++drawn;
    }
  }

  atomic_write(path, [&](std::ostream& os) {
    os << "P6\n" << nx << " " << ny << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.data()),
             static_cast<std::streamsize>(img.size()));
  });
  atomic_write(path.string() + ".txt", [&](std::ostream& os) {
    os << "min " << scale.min << "\n";
    os << "max " << scale.max << "\n";
    os << "unit " << unit_name(raster.unit) << "\n";
    os << "colormap " << scale.colormap << "\n";
    os << "orientation pixel(0,0)-bottom-left-y-up\n";
    os << "glyph_count " << drawn << "\n";
  });
  return drawn;
}

}  // namespace qdm
