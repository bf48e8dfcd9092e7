// Perturbations with an L-infinity budget, and the composition/projection
// primitives of masked pixel-space attacks:
//
//   x_delta = clip_[0,1](x + M .* delta),   ||delta||_inf <= epsilon
//
// Pixels where the mask is zero are untouched bit-for-bit.
#pragma once

#include <algorithm>
#include <cmath>

#include "confuse/core/grid.hpp"
#include "confuse/core/image.hpp"
#include "confuse/core/mask.hpp"
#include "confuse/core/rng.hpp"

namespace confuse {

struct Perturbation {
  PixelGrid px;
  float epsilon = 0.0f;  // L-infinity budget this perturbation lives under

  Perturbation() = default;
  Perturbation(PixelGrid grid, float eps) : px(std::move(grid)), epsilon(eps) {}

  static Perturbation zeros(int height, int width, float eps) {
    if (eps < 0.0f) throw ConfigError("epsilon must be >= 0");
    return Perturbation(PixelGrid(3, height, width, 0.0f), eps);
  }

  float max_abs() const {
    float m = 0.0f;
    for (float v : px.data) m = std::max(m, std::fabs(v));
    return m;
  }
};

// Clamps every element of delta to [-epsilon, epsilon]. Elements already
// inside the ball are returned unchanged (idempotent).
inline Perturbation project_budget(Perturbation delta, float epsilon) {
  if (epsilon < 0.0f) throw ConfigError("epsilon must be >= 0");
  for (float& v : delta.px.data) v = std::clamp(v, -epsilon, epsilon);
  delta.epsilon = epsilon;
  return delta;
}

// x_delta = clip_[0,1](x + M .* delta). Positions with M = 0 keep the exact
// bit pattern of x.
inline Image apply_perturbation(const Image& x, const Perturbation& delta, const Mask& mask) {
  require_same_shape(x.px, delta.px, "apply_perturbation");
  if (mask.height() != x.height() || mask.width() != x.width()) {
    throw DimensionError("apply_perturbation: mask is " + mask.cells.shape_string() +
                         " for image " + x.px.shape_string());
  }
  Image out = x;
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < x.height(); ++y) {
      for (int xx = 0; xx < x.width(); ++xx) {
        if (!mask.at(y, xx)) continue;
        float v = x.at(c, y, xx) + delta.px.at(c, y, xx);
        out.at(c, y, xx) = std::clamp(v, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

// I.i.d. U(-epsilon, epsilon) draw in channel-major order, reproducible from
// the seed via splitmix64.
inline Perturbation uniform_noise(float epsilon, int height, int width, std::uint64_t seed) {
  if (epsilon < 0.0f) throw ConfigError("epsilon must be >= 0");
  Perturbation noise = Perturbation::zeros(height, width, epsilon);
  SplitMix64 rng(seed);
  for (float& v : noise.px.data) {
    v = static_cast<float>(rng.next_symmetric(static_cast<double>(epsilon)));
  }
  return noise;
}

}  // namespace confuse
