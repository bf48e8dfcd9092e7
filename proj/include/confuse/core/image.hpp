// Image value type: 3-channel float pixels in [0, 1].
#pragma once

#include <cmath>
#include <string>

#include "confuse/core/grid.hpp"

namespace confuse {

struct Image {
  PixelGrid px;

  Image() = default;
  explicit Image(PixelGrid grid) : px(std::move(grid)) {}

  int channels() const { return px.channels; }
  int height() const { return px.height; }
  int width() const { return px.width; }

  float& at(int c, int y, int x) { return px.at(c, y, x); }
  float at(int c, int y, int x) const { return px.at(c, y, x); }

  // Enforces the type invariants: exactly 3 channels, every value in [0, 1].
  void validate() const {
    if (px.channels != 3) {
      throw DimensionError("image must have 3 channels, got " + px.shape_string());
    }
    for (float v : px.data) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw DimensionError("image pixel out of [0,1]: " + std::to_string(v));
      }
    }
  }

  static Image solid(int height, int width, float value) {
    return Image(PixelGrid(3, height, width, value));
  }

  // Deterministic RGB ramp used as the clean test image of the toy world:
  // pixel[c][i][j] = (c+1)*(i+j) / (3*(H-1 + W-1)), clipped to [0,1].
  // Non-degenerate (entropy strictly below ln k on the toy models) so
  // confusion ratios above 1 are meaningful.
  static Image gradient_ramp(int height, int width) {
    Image img = solid(height, width, 0.0f);
    const double denom = 3.0 * (height - 1 + width - 1);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double v = (c + 1) * static_cast<double>(y + x) / denom;
          img.at(c, y, x) = static_cast<float>(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
        }
      }
    }
    return img;
  }
};

// Snaps every pixel to the nearest 8-bit level: round(x*255)/255.
// Evaluation on quantized images reflects what an exported PNG contains.
inline Image quantize_roundtrip(const Image& x) {
  Image out = x;
  for (float& v : out.px.data) {
    long level = std::lround(static_cast<double>(v) * 255.0);
    if (level < 0) level = 0;
    if (level > 255) level = 255;
    v = static_cast<float>(level) / 255.0f;
  }
  return out;
}

}  // namespace confuse
