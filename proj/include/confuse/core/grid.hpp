// Dense channel-major pixel grids (C x H x W) used for images, perturbations
// and gradients. Plain value type: cheap to copy-on-write via std::vector.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "confuse/core/errors.hpp"

namespace confuse {

template <typename T>
struct Grid {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;  // index: (c * height + y) * width + x

  Grid() = default;
  Grid(int c, int h, int w, T fill = T{})
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {
    if (c <= 0 || h <= 0 || w <= 0) {
      throw DimensionError("grid dimensions must be positive, got " + shape_string());
    }
  }

  static Grid zeros(int c, int h, int w) { return Grid(c, h, w, T{}); }

  T& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  const T& at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  std::size_t size() const { return data.size(); }

  bool same_shape(const Grid& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }

  std::string shape_string() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" +
           std::to_string(width);
  }

  template <typename U>
  Grid<U> cast() const {
    Grid<U> out;
    out.channels = channels;
    out.height = height;
    out.width = width;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using PixelGrid = Grid<float>;
using GradGrid = Grid<double>;

template <typename T>
void require_same_shape(const Grid<T>& a, const Grid<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape_string() +
                         " vs " + b.shape_string());
  }
}

}  // namespace confuse
