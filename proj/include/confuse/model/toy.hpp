// A fully deterministic, closed-form differentiable captioning surrogate.
// It lets the attack loop, gradients and every metric be verified at desk
// scale without any ML framework or downloaded weights.
//
// Architecture: the input is resized bilinearly to 32x32, mean-pooled over a
// 4x4 cell grid per channel (features = cell mean - 0.5, 48 features in
// channel-major order f = c*16 + row*4 + col), then mapped linearly to 64
// logits. Weights are a closed-form sinusoidal chirp,
//
//   W[v][f] = gain * sin(0.7 * m^2 + phase),   m = v*48 + f + 1,
//
// which is bit-portable across implementations without specifying a PRNG.
// The squared index de-correlates rows (a linear index would make every row
// the same frequency-0.7 sinusoid, collapsing the matrix to rank 2 and
// pinning every image's entropy near ln k); the gain sets clean-image
// entropy well below ln k so confusion ratios above 1 are meaningful.
//
// The all-gray image maps to all-zero features, hence all-equal logits and
// entropy exactly ln k, for every phase variant.
#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confuse/model/bilinear.hpp"
#include "confuse/model/surrogate.hpp"

namespace confuse {

struct ToyModelSpec {
  static constexpr int kVocabSize = 64;
  static constexpr int kCellGrid = 4;   // 4x4 pooling cells
  static constexpr int kInputSize = 32;
  static constexpr int kCellSize = kInputSize / kCellGrid;  // 8x8 pixels per cell
  static constexpr int kFeatureCount = 3 * kCellGrid * kCellGrid;

  std::string model_id;
  std::string family;
  double phase = 0.0;  // distinguishes ensemble variants
  double gain = 8.0;   // logit amplitude

  double weight(int v, int f) const {
    double m = static_cast<double>(v) * kFeatureCount + f + 1;
    return gain * std::sin(0.7 * m * m + phase);
  }
};

class ToyCaptioner final : public SurrogateModel {
 public:
  explicit ToyCaptioner(ToyModelSpec spec) : spec_(std::move(spec)) {
    weights_.resize(static_cast<std::size_t>(ToyModelSpec::kVocabSize) *
                    ToyModelSpec::kFeatureCount);
    for (int v = 0; v < ToyModelSpec::kVocabSize; ++v) {
      for (int f = 0; f < ToyModelSpec::kFeatureCount; ++f) {
        weights_[static_cast<std::size_t>(v) * ToyModelSpec::kFeatureCount + f] =
            spec_.weight(v, f);
      }
    }
  }

  const ToyModelSpec& spec() const { return spec_; }
  const std::string& model_id() const override { return spec_.model_id; }
  const std::string& family() const override { return spec_.family; }
  int vocab_size() const override { return ToyModelSpec::kVocabSize; }
  Preprocessing preprocessing() const override {
    return Preprocessing{ToyModelSpec::kInputSize, ToyModelSpec::kInputSize, 1.0, 0.0};
  }
  bool thread_safe() const override { return true; }
  bool prompt_insensitive() const override { return true; }

  LogitVector forward_logits(const Image& x, std::string_view) const override {
    std::vector<double> features = extract_features(x);
    LogitVector z(ToyModelSpec::kVocabSize, 0.0);
    for (int v = 0; v < ToyModelSpec::kVocabSize; ++v) {
      double acc = 0.0;
      const double* row = &weights_[static_cast<std::size_t>(v) * ToyModelSpec::kFeatureCount];
      for (int f = 0; f < ToyModelSpec::kFeatureCount; ++f) acc += row[f] * features[f];
      z[static_cast<std::size_t>(v)] = acc;
    }
    return z;
  }

  GradGrid input_gradient(const Image& x, std::string_view prompt,
                          const LogitObjective& objective) const override {
    LogitVector z = forward_logits(x, prompt);
    std::vector<double> gz = objective.logit_gradient(z);
    if (gz.size() != z.size()) {
      throw AdapterError(spec_.model_id, "objective gradient has wrong length");
    }
    // Back through the linear map: gf = W^T gz.
    std::vector<double> gfeat(ToyModelSpec::kFeatureCount, 0.0);
    for (int v = 0; v < ToyModelSpec::kVocabSize; ++v) {
      const double gv = gz[static_cast<std::size_t>(v)];
      if (gv == 0.0) continue;
      const double* row = &weights_[static_cast<std::size_t>(v) * ToyModelSpec::kFeatureCount];
      for (int f = 0; f < ToyModelSpec::kFeatureCount; ++f) gfeat[f] += row[f] * gv;
    }
    // Back through mean pooling: each of the 8x8 pixels in a cell carries
    // 1/64 of the cell's feature gradient.
    constexpr int n = ToyModelSpec::kInputSize;
    constexpr double cell_weight =
        1.0 / (ToyModelSpec::kCellSize * ToyModelSpec::kCellSize);
    GradGrid g32(3, n, n, 0.0);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < n; ++y) {
        for (int xx = 0; xx < n; ++xx) {
          g32.at(c, y, xx) = gfeat[static_cast<std::size_t>(feature_index(
                                 c, y / ToyModelSpec::kCellSize, xx / ToyModelSpec::kCellSize))] *
                             cell_weight;
        }
      }
    }
    // Back through the shared-canvas resize.
    return resize_bilinear_adjoint(g32, x.height(), x.width());
  }

  static int feature_index(int channel, int cell_row, int cell_col) {
    return channel * ToyModelSpec::kCellGrid * ToyModelSpec::kCellGrid +
           cell_row * ToyModelSpec::kCellGrid + cell_col;
  }

 private:
  std::vector<double> extract_features(const Image& x) const {
    GradGrid pixels = x.px.cast<double>();
    GradGrid resized =
        resize_bilinear(pixels, ToyModelSpec::kInputSize, ToyModelSpec::kInputSize);
    std::vector<double> features(ToyModelSpec::kFeatureCount, 0.0);
    constexpr int cs = ToyModelSpec::kCellSize;
    for (int c = 0; c < 3; ++c) {
      for (int cy = 0; cy < ToyModelSpec::kCellGrid; ++cy) {
        for (int cx = 0; cx < ToyModelSpec::kCellGrid; ++cx) {
          double sum = 0.0;
          for (int y = cy * cs; y < (cy + 1) * cs; ++y) {
            for (int xx = cx * cs; xx < (cx + 1) * cs; ++xx) sum += resized.at(c, y, xx);
          }
          features[static_cast<std::size_t>(feature_index(c, cy, cx))] =
              sum / (cs * cs) - 0.5;
        }
      }
    }
    return features;
  }

  ToyModelSpec spec_;
  std::vector<double> weights_;
};

inline ModelPtr make_toy_model(std::string model_id, std::string family, double phase,
                               double gain = 8.0) {
  ToyModelSpec spec;
  spec.model_id = std::move(model_id);
  spec.family = std::move(family);
  spec.phase = phase;
  spec.gain = gain;
  return std::make_shared<ToyCaptioner>(std::move(spec));
}

// The stock desk-scale ensemble. toy-a and toy-b share a family so the
// cross-family held-out protocol has a valid split with toy-c held out.
inline void register_toy_models(ModelRegistry& registry) {
  registry.add(make_toy_model("toy-a", "toyA", 0.0));
  registry.add(make_toy_model("toy-b", "toyA", 1.0));
  registry.add(make_toy_model("toy-c", "toyC", 2.0));
}

}  // namespace confuse
