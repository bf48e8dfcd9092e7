// The attack objective: top-k logit truncation, temperature softmax, Shannon
// entropy (nats), and the ensemble mean across surrogate models.
//
// Truncation is hard: the k largest logits are kept and the softmax is
// renormalized over exactly k values, which standardizes entropy across
// models with different vocabulary sizes. Within one gradient evaluation the
// selected index set is treated as constant; the set is re-selected at every
// attack iteration.
#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "confuse/model/surrogate.hpp"

namespace confuse {

struct ObjectiveConfig {
  int k = 50;                // top-k truncation
  double temperature = 1.0;  // softmax temperature

  void validate() const {
    if (k < 1) throw ConfigError("objective k must be >= 1");
    if (!(temperature > 0.0)) throw ConfigError("objective temperature must be > 0");
  }
};

// Indices of the k largest logits, ties broken by lower vocabulary index.
inline std::vector<int> topk_indices(std::span<const double> z, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (static_cast<std::size_t>(k) > z.size()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds vocab size " +
                      std::to_string(z.size()));
  }
  std::vector<int> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (z[static_cast<std::size_t>(a)] != z[static_cast<std::size_t>(b)]) {
      return z[static_cast<std::size_t>(a)] > z[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

// The k largest logit values, sorted descending.
inline std::vector<double> topk_truncate(std::span<const double> z, int k) {
  std::vector<int> idx = topk_indices(z, k);
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = z[static_cast<std::size_t>(idx[i])];
  return out;
}

// Shannon entropy of softmax(z / temperature) in nats. Max-subtracted for
// stability; result lies in [0, ln k].
inline double entropy_of_logits(std::span<const double> z, double temperature) {
  if (z.empty()) throw DimensionError("entropy of empty logit vector");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0, weighted = 0.0;
  for (double v : z) {
    double u = (v - zmax) / temperature;
    double e = std::exp(u);
    sum += e;
    weighted += u * e;
  }
  return std::log(sum) - weighted / sum;
}

// Entropy restricted to the current top-k set, as a differentiable objective
// over the full logit vector. Gradient components off the selected set are
// zero (the selection is constant within one evaluation).
class EntropyObjective final : public LogitObjective {
 public:
  explicit EntropyObjective(ObjectiveConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const ObjectiveConfig& config() const { return cfg_; }

  double value(std::span<const double> logits) const override {
    std::vector<double> kept = topk_truncate(logits, cfg_.k);
    return entropy_of_logits(kept, cfg_.temperature);
  }

  std::vector<double> logit_gradient(std::span<const double> logits) const override {
    std::vector<int> idx = topk_indices(logits, cfg_.k);
    const double T = cfg_.temperature;
    double zmax = logits[static_cast<std::size_t>(idx[0])];
    std::vector<double> p(idx.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      p[i] = std::exp((logits[static_cast<std::size_t>(idx[i])] - zmax) / T);
      sum += p[i];
    }
    double entropy = 0.0;
    for (double& v : p) {
      v /= sum;
      entropy -= v * std::log(v);
    }
    // dH/dz_i = -p_i (ln p_i + H) / T on the selected set.
    std::vector<double> grad(logits.size(), 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      grad[static_cast<std::size_t>(idx[i])] = -p[i] * (std::log(p[i]) + entropy) / T;
    }
    return grad;
  }

 private:
  ObjectiveConfig cfg_;
};

// Entropy of one model's next-token distribution at (x, prompt).
inline double model_entropy(const SurrogateModel& model, const Image& x,
                            std::string_view prompt, const ObjectiveConfig& cfg) {
  cfg.validate();
  if (cfg.k > model.vocab_size()) {
    throw ConfigError("k = " + std::to_string(cfg.k) + " exceeds vocab size of '" +
                      model.model_id() + "'");
  }
  LogitVector z = model.forward_logits(x, prompt);
  std::vector<double> kept = topk_truncate(z, cfg.k);
  return entropy_of_logits(kept, cfg.temperature);
}

struct EnsembleEntropy {
  double mean = 0.0;
  std::vector<double> per_model;
};

namespace detail {

inline void check_ensemble(std::span<const ModelPtr> models, const ObjectiveConfig& cfg) {
  if (models.empty()) throw ConfigError("ensemble must contain at least one model");
  cfg.validate();
  for (const auto& m : models) {
    if (cfg.k > m->vocab_size()) {
      throw ConfigError("k = " + std::to_string(cfg.k) + " exceeds vocab size of '" +
                        m->model_id() + "'");
    }
  }
}

inline bool all_thread_safe(std::span<const ModelPtr> models) {
  return std::all_of(models.begin(), models.end(),
                     [](const ModelPtr& m) { return m->thread_safe(); });
}

// Runs fn(j) for every model index, in parallel when all adapters allow it.
// Results land in index order, so the reduction below is deterministic
// regardless of scheduling.
template <typename Fn>
void for_each_model(std::span<const ModelPtr> models, Fn&& fn) {
  if (models.size() > 1 && all_thread_safe(models)) {
    std::vector<std::future<void>> futures;
    futures.reserve(models.size());
    for (std::size_t j = 0; j < models.size(); ++j) {
      futures.push_back(std::async(std::launch::async, [&fn, j] { fn(j); }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t j = 0; j < models.size(); ++j) fn(j);
  }
}

}  // namespace detail

// Mean entropy across the ensemble, plus per-model values for logging.
// Summation follows the given model order.
inline EnsembleEntropy ensemble_objective(std::span<const ModelPtr> models, const Image& x,
                                          std::string_view prompt, const ObjectiveConfig& cfg) {
  detail::check_ensemble(models, cfg);
  EnsembleEntropy out;
  out.per_model.resize(models.size());
  detail::for_each_model(models, [&](std::size_t j) {
    out.per_model[j] = model_entropy(*models[j], x, prompt, cfg);
  });
  double sum = 0.0;
  for (double h : out.per_model) sum += h;
  out.mean = sum / static_cast<double>(models.size());
  return out;
}

struct EnsembleEvaluation {
  EnsembleEntropy entropy;
  GradGrid gradient;  // d(mean entropy)/dx, same shape as x
};

// One fused pass producing the ensemble objective and its pixel gradient.
inline EnsembleEvaluation ensemble_objective_with_gradient(std::span<const ModelPtr> models,
                                                           const Image& x,
                                                           std::string_view prompt,
                                                           const ObjectiveConfig& cfg) {
  detail::check_ensemble(models, cfg);
  EntropyObjective objective(cfg);
  std::vector<GradGrid> grads(models.size());
  EnsembleEvaluation out;
  out.entropy.per_model.resize(models.size());
  detail::for_each_model(models, [&](std::size_t j) {
    out.entropy.per_model[j] = model_entropy(*models[j], x, prompt, cfg);
    grads[j] = models[j]->input_gradient(x, prompt, objective);
  });
  double sum = 0.0;
  for (double h : out.entropy.per_model) sum += h;
  out.entropy.mean = sum / static_cast<double>(models.size());

  out.gradient = GradGrid(x.channels(), x.height(), x.width(), 0.0);
  const double inv = 1.0 / static_cast<double>(models.size());
  for (const GradGrid& g : grads) {
    require_same_shape(g, out.gradient, "ensemble gradient");
    for (std::size_t i = 0; i < g.data.size(); ++i) out.gradient.data[i] += g.data[i] * inv;
  }
  return out;
}

}  // namespace confuse
