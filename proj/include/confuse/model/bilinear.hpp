// Bilinear resize with half-pixel centers, plus its adjoint. Tap weights
// depend only on geometry, so the resize is linear in pixel values and the
// adjoint is the exact gradient of the forward map. Adapters use this to pull
// a shared attack canvas to their own input resolution while keeping the
// chain differentiable back to the canvas.
#pragma once

#include <cmath>
#include <vector>

#include "confuse/core/grid.hpp"

namespace confuse {

namespace detail {

struct ResizeTap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;  // weight of hi; lo gets (1 - frac)
};

inline std::vector<ResizeTap> resize_taps(int src, int dst) {
  std::vector<ResizeTap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (int d = 0; d < dst; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    double floor_s = std::floor(s);
    int lo = static_cast<int>(floor_s);
    double frac = s - floor_s;
    int hi = lo + 1;
    if (lo < 0) lo = 0;
    if (hi < 0) hi = 0;
    if (lo > src - 1) lo = src - 1;
    if (hi > src - 1) hi = src - 1;
    taps[static_cast<std::size_t>(d)] = ResizeTap{lo, hi, frac};
  }
  return taps;
}

}  // namespace detail

inline GradGrid resize_bilinear(const GradGrid& src, int out_h, int out_w) {
  if (src.height == out_h && src.width == out_w) return src;
  GradGrid out(src.channels, out_h, out_w, 0.0);
  const auto ytaps = detail::resize_taps(src.height, out_h);
  const auto xtaps = detail::resize_taps(src.width, out_w);
  for (int c = 0; c < src.channels; ++c) {
    for (int y = 0; y < out_h; ++y) {
      const auto& ty = ytaps[static_cast<std::size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        const auto& tx = xtaps[static_cast<std::size_t>(x)];
        double top = src.at(c, ty.lo, tx.lo) * (1.0 - tx.frac) + src.at(c, ty.lo, tx.hi) * tx.frac;
        double bot = src.at(c, ty.hi, tx.lo) * (1.0 - tx.frac) + src.at(c, ty.hi, tx.hi) * tx.frac;
        out.at(c, y, x) = top * (1.0 - ty.frac) + bot * ty.frac;
      }
    }
  }
  return out;
}

// Transpose of resize_bilinear: scatters output-space gradients back onto the
// input grid with the same tap weights.
inline GradGrid resize_bilinear_adjoint(const GradGrid& grad_out, int in_h, int in_w) {
  if (grad_out.height == in_h && grad_out.width == in_w) return grad_out;
  GradGrid out(grad_out.channels, in_h, in_w, 0.0);
  const auto ytaps = detail::resize_taps(in_h, grad_out.height);
  const auto xtaps = detail::resize_taps(in_w, grad_out.width);
  for (int c = 0; c < grad_out.channels; ++c) {
    for (int y = 0; y < grad_out.height; ++y) {
      const auto& ty = ytaps[static_cast<std::size_t>(y)];
      for (int x = 0; x < grad_out.width; ++x) {
        const auto& tx = xtaps[static_cast<std::size_t>(x)];
        const double g = grad_out.at(c, y, x);
        out.at(c, ty.lo, tx.lo) += g * (1.0 - ty.frac) * (1.0 - tx.frac);
        out.at(c, ty.lo, tx.hi) += g * (1.0 - ty.frac) * tx.frac;
        out.at(c, ty.hi, tx.lo) += g * ty.frac * (1.0 - tx.frac);
        out.at(c, ty.hi, tx.hi) += g * ty.frac * tx.frac;
      }
    }
  }
  return out;
}

}  // namespace confuse
