// The contract every attackable model adapter must satisfy: map an image and
// a prompt through the adapter's own preprocessing to next-token logits at
// the final prompt position, and expose gradients of a scalar logit objective
// with respect to the input pixels.
//
// Chat templates, tokenizer details and the location of the final prompt
// position are internal to each adapter; callers only ever see "the
// next-token logits".
#pragma once

#include <dlfcn.h>

#include <cstdlib>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confuse/core/errors.hpp"
#include "confuse/core/image.hpp"

namespace confuse {

using LogitVector = std::vector<double>;

// Scalar differentiable function of a logit vector. Adapters backpropagate
// logit_gradient through their own pipelines to produce pixel gradients.
class LogitObjective {
 public:
  virtual ~LogitObjective() = default;
  virtual double value(std::span<const double> logits) const = 0;
  virtual std::vector<double> logit_gradient(std::span<const double> logits) const = 0;
};

struct Preprocessing {
  int input_height = 0;
  int input_width = 0;
  // Per-channel affine normalization applied after the resize. The toy
  // adapters use identity; real adapters would carry their pipeline's values.
  double scale = 1.0;
  double shift = 0.0;
};

class SurrogateModel {
 public:
  virtual ~SurrogateModel() = default;

  virtual const std::string& model_id() const = 0;
  virtual const std::string& family() const = 0;
  virtual int vocab_size() const = 0;
  virtual Preprocessing preprocessing() const = 0;

  // Safe for concurrent read-only evaluation? The ensemble evaluator runs
  // models in parallel only when every adapter declares true.
  virtual bool thread_safe() const { return false; }

  // Adapters whose logits do not depend on the prompt may declare it.
  virtual bool prompt_insensitive() const { return false; }

  // Next-token logits at the final prompt position. Deterministic for a
  // fixed (model, image, prompt). Length equals vocab_size().
  virtual LogitVector forward_logits(const Image& x, std::string_view prompt) const = 0;

  // d objective(forward_logits(x)) / d x, same shape as x. Adapters without
  // gradient support throw CapabilityError.
  virtual GradGrid input_gradient(const Image& x, std::string_view prompt,
                                  const LogitObjective& objective) const = 0;
};

using ModelPtr = std::shared_ptr<SurrogateModel>;

// Registry keyed by model_id. Extension adapters register themselves through
// a plugin entry point:
//
//   extern "C" void confuse_register_models(confuse::ModelRegistry* registry);
//
// Shared objects listed in the CONFUSE_ADAPTER_PATH environment variable
// (colon separated) are loaded before model ids are resolved.
class ModelRegistry {
 public:
  void add(ModelPtr model) {
    const std::string& id = model->model_id();
    if (models_.count(id) != 0) {
      throw ConfigError("model id '" + id + "' registered twice");
    }
    models_.emplace(id, std::move(model));
  }

  ModelPtr find(const std::string& id) const {
    auto it = models_.find(id);
    return it == models_.end() ? nullptr : it->second;
  }

  ModelPtr require(const std::string& id) const {
    ModelPtr m = find(id);
    if (!m) throw ConfigError("unknown model id '" + id + "'");
    return m;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(models_.size());
    for (const auto& [id, _] : models_) out.push_back(id);
    return out;
  }

  std::size_t size() const { return models_.size(); }

  // Loads one plugin shared object and runs its registration entry point.
  // Returns the number of models it added.
  std::size_t load_plugin(const std::string& path) {
    void* handle = ::dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (!handle) {
      throw ConfigError("cannot load adapter plugin '" + path + "': " + ::dlerror());
    }
    using EntryPoint = void (*)(ModelRegistry*);
    auto entry = reinterpret_cast<EntryPoint>(::dlsym(handle, "confuse_register_models"));
    if (!entry) {
      throw ConfigError("plugin '" + path + "' does not export confuse_register_models");
    }
    std::size_t before = models_.size();
    entry(this);
    return models_.size() - before;
  }

  std::size_t load_plugins_from_env(const char* variable = "CONFUSE_ADAPTER_PATH") {
    const char* value = std::getenv(variable);
    if (!value) return 0;
    std::size_t added = 0;
    std::string paths(value);
    std::size_t start = 0;
    while (start <= paths.size()) {
      std::size_t end = paths.find(':', start);
      if (end == std::string::npos) end = paths.size();
      std::string path = paths.substr(start, end - start);
      if (!path.empty()) added += load_plugin(path);
      start = end + 1;
    }
    return added;
  }

 private:
  std::map<std::string, ModelPtr> models_;
};

}  // namespace confuse
