// Effective Confusion Ratio: attacked entropy relative to the stronger of
// the clean-image and uniform-noise baselines. Values above 1 mean the
// attack induced more uncertainty than both baselines.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "confuse/attack/pgd.hpp"

namespace confuse {

struct EcrRecord {
  std::string model_id;
  double h_adv = 0.0;    // nats
  double h_clean = 0.0;
  double h_noise = 0.0;
  double ecr = 0.0;
};

inline double compute_ecr(double h_adv, double h_clean, double h_noise) {
  if (h_adv < 0.0 || h_clean < 0.0 || h_noise < 0.0) {
    throw ConfigError("entropies must be >= 0");
  }
  double denom = h_clean > h_noise ? h_clean : h_noise;
  if (denom == 0.0) {
    throw DenominatorError("ECR denominator is zero (both baselines have zero entropy); "
                           "this indicates a broken adapter, not an infinite ratio");
  }
  return h_adv / denom;
}

// Entropies and ECR per model for an (clean, adversarial) image pair. The
// noise baseline is built from the clean image with a full mask and the SAME
// epsilon as the attack under evaluation, which makes it the harder baseline
// even for patch attacks.
inline std::vector<EcrRecord> evaluate_image(std::span<const ModelPtr> models,
                                             const Image& x_clean, const Image& x_adv,
                                             std::string_view prompt,
                                             const ObjectiveConfig& cfg, float epsilon,
                                             std::uint64_t noise_seed) {
  detail::check_ensemble(models, cfg);
  require_same_shape(x_clean.px, x_adv.px, "evaluate_image");
  const Mask full = make_mask(MaskGeometry::full(), x_clean.height(), x_clean.width());
  const Perturbation noise =
      uniform_noise(epsilon, x_clean.height(), x_clean.width(), noise_seed);
  const Image x_noise = apply_perturbation(x_clean, noise, full);

  std::vector<EcrRecord> records;
  records.reserve(models.size());
  for (const ModelPtr& model : models) {
    EcrRecord rec;
    rec.model_id = model->model_id();
    rec.h_clean = model_entropy(*model, x_clean, prompt, cfg);
    rec.h_noise = model_entropy(*model, x_noise, prompt, cfg);
    rec.h_adv = model_entropy(*model, x_adv, prompt, cfg);
    rec.ecr = compute_ecr(rec.h_adv, rec.h_clean, rec.h_noise);
    records.push_back(std::move(rec));
  }
  return records;
}

inline double mean_ecr(std::span<const EcrRecord> records) {
  if (records.empty()) throw StateError("mean of empty ECR records");
  double sum = 0.0;
  for (const auto& r : records) sum += r.ecr;
  return sum / static_cast<double>(records.size());
}

}  // namespace confuse
