// Binary spatial masks selecting the attackable region. One value per pixel
// position, broadcast across all channels.
#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "confuse/core/grid.hpp"

namespace confuse {

struct MaskGeometry {
  enum class Kind { Full, Rect };

  Kind kind = Kind::Full;
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  static MaskGeometry full() { return MaskGeometry{}; }

  static MaskGeometry rect(int top, int left, int height, int width) {
    MaskGeometry g;
    g.kind = Kind::Rect;
    g.top = top;
    g.left = left;
    g.height = height;
    g.width = width;
    return g;
  }

  // Accepts "full" or "rect:top,left,height,width".
  static MaskGeometry parse(const std::string& text) {
    if (text == "full") return full();
    if (text.rfind("rect:", 0) == 0) {
      std::istringstream in(text.substr(5));
      int t, l, h, w;
      char c1, c2, c3;
      if (in >> t >> c1 >> l >> c2 >> h >> c3 >> w && c1 == ',' && c2 == ',' && c3 == ',') {
        std::string rest;
        if (!(in >> rest)) return rect(t, l, h, w);
      }
      throw GeometryError("bad rect geometry '" + text + "', expected rect:top,left,h,w");
    }
    throw GeometryError("unknown mask geometry '" + text + "'");
  }

  std::string to_string() const {
    if (kind == Kind::Full) return "full";
    std::ostringstream out;
    out << "rect:" << top << "," << left << "," << height << "," << width;
    return out.str();
  }
};

struct Mask {
  Grid<std::uint8_t> cells;  // 1 x H x W, values in {0, 1}
  MaskGeometry geometry;

  int height() const { return cells.height; }
  int width() const { return cells.width; }
  bool at(int y, int x) const { return cells.at(0, y, x) != 0; }

  double active_fraction() const {
    std::size_t ones = 0;
    for (auto v : cells.data) ones += v;
    return static_cast<double>(ones) / static_cast<double>(cells.size());
  }
};

// Builds a mask for the given canvas. Rectangles must lie fully inside it.
inline Mask make_mask(const MaskGeometry& geometry, int height, int width) {
  Mask mask;
  mask.geometry = geometry;
  if (geometry.kind == MaskGeometry::Kind::Full) {
    mask.cells = Grid<std::uint8_t>(1, height, width, 1);
    return mask;
  }
  if (geometry.height <= 0 || geometry.width <= 0 || geometry.top < 0 || geometry.left < 0 ||
      geometry.top + geometry.height > height || geometry.left + geometry.width > width) {
    throw GeometryError("rectangle " + geometry.to_string() + " does not fit in " +
                        std::to_string(height) + "x" + std::to_string(width));
  }
  mask.cells = Grid<std::uint8_t>(1, height, width, 0);
  for (int y = geometry.top; y < geometry.top + geometry.height; ++y) {
    for (int x = geometry.left; x < geometry.left + geometry.width; ++x) {
      mask.cells.at(0, y, x) = 1;
    }
  }
  return mask;
}

}  // namespace confuse
