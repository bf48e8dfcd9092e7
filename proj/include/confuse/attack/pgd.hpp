// Masked projected gradient ascent on the ensemble entropy objective.
//
// Per iteration, at the current perturbed image:
//
//   delta <- Pi_{||.||_inf <= eps} (delta + eta * (M .* g))
//
// where g ascends the mean top-k entropy across the ensemble. The raw
// gradient is used by default; a sign-step variant is available behind the
// step_rule switch for comparison. Gradients are zeroed where the pixel clip
// of the composition is active (true subgradient of the clamp), and by the
// chain rule the pixel gradient equals the perturbation gradient inside the
// mask.
//
// The trace records the objective before each step plus one final post-loop
// evaluation, so a run with N iterations yields N+1 candidate iterates. The
// returned perturbation is the candidate with the highest ensemble entropy
// (earliest on ties), not the last one.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confuse/core/perturbation.hpp"
#include "confuse/objective/entropy.hpp"

namespace confuse {

enum class StepRule { RawGradient, SignGradient };
enum class InitRule { Zero, Uniform };

inline const char* to_string(StepRule rule) {
  return rule == StepRule::RawGradient ? "raw" : "sign";
}
inline const char* to_string(InitRule rule) {
  return rule == InitRule::Zero ? "zero" : "uniform";
}

struct AttackConfig {
  float epsilon = 1.0f;
  double eta = 0.5;
  int iterations = 50;
  ObjectiveConfig objective;
  MaskGeometry mask = MaskGeometry::full();
  std::string prompt = "Describe this image.";
  std::uint64_t seed = 0;
  InitRule init = InitRule::Zero;
  StepRule step_rule = StepRule::RawGradient;

  void validate() const {
    if (epsilon < 0.0f) throw ConfigError("epsilon must be >= 0");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    objective.validate();
  }
};

struct TraceEntry {
  int iteration = 0;
  double ensemble_entropy = 0.0;
  std::vector<double> per_model;
};

struct AttackResult {
  Perturbation best_delta;
  Image best_image;
  int best_iteration = 0;
  std::vector<TraceEntry> trace;  // iterations + 1 entries
  AttackConfig config;
};

// Adapter failure mid-run; carries whatever trace was recorded.
class AttackAbortedError : public AdapterError {
 public:
  AttackAbortedError(const AdapterError& cause, std::vector<TraceEntry> partial)
      : AdapterError(cause.model_id(), cause.what()), partial_trace_(std::move(partial)) {}
  const std::vector<TraceEntry>& partial_trace() const { return partial_trace_; }

 private:
  std::vector<TraceEntry> partial_trace_;
};

// One projected step. grad must point in the ascent direction of the
// objective; masking keeps updates inside the attack region.
inline Perturbation pgd_step(Perturbation delta, const GradGrid& grad, double eta,
                             const Mask& mask, float epsilon,
                             StepRule rule = StepRule::RawGradient) {
  if (grad.channels != delta.px.channels || grad.height != delta.px.height ||
      grad.width != delta.px.width) {
    throw DimensionError("pgd_step: gradient shape " + grad.shape_string() +
                         " does not match delta " + delta.px.shape_string());
  }
  if (mask.height() != delta.px.height || mask.width() != delta.px.width) {
    throw DimensionError("pgd_step: mask shape mismatch");
  }
  for (int c = 0; c < delta.px.channels; ++c) {
    for (int y = 0; y < delta.px.height; ++y) {
      for (int x = 0; x < delta.px.width; ++x) {
        if (!mask.at(y, x)) continue;
        double g = grad.at(c, y, x);
        if (rule == StepRule::SignGradient) g = (g > 0.0) - (g < 0.0);
        delta.px.at(c, y, x) = static_cast<float>(delta.px.at(c, y, x) + eta * g);
      }
    }
  }
  return project_budget(std::move(delta), epsilon);
}

// Index of the highest ensemble entropy in the trace, earliest on exact ties.
inline int select_best(std::span<const double> entropies) {
  if (entropies.empty()) throw StateError("select_best on empty trace");
  int best = 0;
  for (std::size_t i = 1; i < entropies.size(); ++i) {
    if (entropies[i] > entropies[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

inline int select_best(std::span<const TraceEntry> trace) {
  if (trace.empty()) throw StateError("select_best on empty trace");
  int best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].ensemble_entropy > trace[static_cast<std::size_t>(best)].ensemble_entropy) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Called at every recorded candidate (iteration index, current delta, x_delta).
using IterationObserver = std::function<void(int, const Perturbation&, const Image&)>;

inline AttackResult attack(const Image& x, std::span<const ModelPtr> models,
                           const AttackConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  x.validate();
  detail::check_ensemble(models, cfg.objective);

  const Mask mask = make_mask(cfg.mask, x.height(), x.width());
  Perturbation delta = Perturbation::zeros(x.height(), x.width(), cfg.epsilon);
  if (cfg.init == InitRule::Uniform) {
    delta = uniform_noise(cfg.epsilon, x.height(), x.width(), cfg.seed);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < x.height(); ++y) {
        for (int xx = 0; xx < x.width(); ++xx) {
          if (!mask.at(y, xx)) delta.px.at(c, y, xx) = 0.0f;
        }
      }
    }
  }

  AttackResult result;
  result.config = cfg;
  result.trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  double best_entropy = 0.0;

  for (int t = 0; t <= cfg.iterations; ++t) {
    const Image x_delta = apply_perturbation(x, delta, mask);

    EnsembleEvaluation eval;
    try {
      eval = ensemble_objective_with_gradient(models, x_delta, cfg.prompt, cfg.objective);
    } catch (const AdapterError& e) {
      throw AttackAbortedError(e, std::move(result.trace));
    }

    result.trace.push_back(TraceEntry{t, eval.entropy.mean, eval.entropy.per_model});
    if (observer) observer(t, delta, x_delta);

    if (t == 0 || eval.entropy.mean > best_entropy) {
      best_entropy = eval.entropy.mean;
      result.best_iteration = t;
      result.best_delta = delta;
      result.best_image = x_delta;
    }
    if (t == cfg.iterations) break;

    // Zero the gradient where the pixel clip is active; elsewhere the
    // gradient w.r.t. delta equals the gradient w.r.t. the pixel.
    GradGrid ascent = std::move(eval.gradient);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < x.height(); ++y) {
        for (int xx = 0; xx < x.width(); ++xx) {
          if (!mask.at(y, xx)) continue;
          float pre = x.at(c, y, xx) + delta.px.at(c, y, xx);
          if (pre < 0.0f || pre > 1.0f) ascent.at(c, y, xx) = 0.0;
        }
      }
    }
    delta = pgd_step(std::move(delta), ascent, cfg.eta, mask, cfg.epsilon, cfg.step_rule);
  }
  return result;
}

}  // namespace confuse
