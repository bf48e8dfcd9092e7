// Flat key=value run configuration with typed validation. Small enough to be
// written by hand and echoed back verbatim into run artifacts.
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "confuse/attack/pgd.hpp"
#include "confuse/model/surrogate.hpp"

namespace confuse {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out;
  in >> out;
  std::string rest;
  if (!in || (in >> rest)) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "'");
}

inline std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string join_commas(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace detail

struct RunConfig {
  std::string image_path;
  std::string output_dir = "out";
  std::vector<std::string> model_ids;
  AttackConfig attack;
  std::uint64_t eval_seed = 0;
  bool eval_seed_set = false;  // defaults to attack.seed when unset
  bool quantize = true;
  std::optional<std::vector<std::string>> train_models;
  std::optional<std::string> heldout_model;

  std::uint64_t noise_seed() const { return eval_seed_set ? eval_seed : attack.seed; }

  void apply_key(const std::string& key, const std::string& value) {
    if (key == "image") {
      image_path = value;
    } else if (key == "output") {
      output_dir = value;
    } else if (key == "models") {
      model_ids = detail::split_commas(value);
    } else if (key == "epsilon") {
      attack.epsilon = detail::parse_number<float>(key, value);
    } else if (key == "lr") {
      attack.eta = detail::parse_number<double>(key, value);
    } else if (key == "iters") {
      attack.iterations = detail::parse_number<int>(key, value);
    } else if (key == "k") {
      attack.objective.k = detail::parse_number<int>(key, value);
    } else if (key == "temperature") {
      attack.objective.temperature = detail::parse_number<double>(key, value);
    } else if (key == "seed") {
      attack.seed = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "eval_seed") {
      eval_seed = detail::parse_number<std::uint64_t>(key, value);
      eval_seed_set = true;
    } else if (key == "mask") {
      attack.mask = MaskGeometry::parse(value);
    } else if (key == "prompt") {
      attack.prompt = value;
    } else if (key == "init") {
      if (value == "zero") {
        attack.init = InitRule::Zero;
      } else if (value == "uniform") {
        attack.init = InitRule::Uniform;
      } else {
        throw ConfigError("init must be 'zero' or 'uniform', got '" + value + "'");
      }
    } else if (key == "step") {
      if (value == "raw") {
        attack.step_rule = StepRule::RawGradient;
      } else if (value == "sign") {
        attack.step_rule = StepRule::SignGradient;
      } else {
        throw ConfigError("step must be 'raw' or 'sign', got '" + value + "'");
      }
    } else if (key == "quantize") {
      quantize = detail::parse_bool(key, value);
    } else if (key == "train_models") {
      train_models = detail::split_commas(value);
    } else if (key == "heldout_model") {
      heldout_model = value;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  static RunConfig parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string text = detail::trim(line);
      if (text.empty() || text[0] == '#') continue;
      std::size_t eq = text.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                          text + "'");
      }
      cfg.apply_key(detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1)));
    }
    return cfg;
  }

  static RunConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse(in);
  }

  static RunConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  // Re-validated at parse/dispatch time: budgets, model ids, transfer split.
  void validate(const ModelRegistry& registry) const {
    attack.validate();
    if (model_ids.empty()) throw ConfigError("config needs a non-empty 'models' list");
    for (const std::string& id : model_ids) registry.require(id);
    if (train_models.has_value() != heldout_model.has_value()) {
      throw ConfigError("train_models and heldout_model must be declared together");
    }
    if (train_models) {
      for (const std::string& id : *train_models) registry.require(id);
      registry.require(*heldout_model);
    }
  }

  // Canonical serialization; reparsing it reproduces the configuration.
  std::string echo() const {
    std::ostringstream out;
    out << "image=" << image_path << "\n";
    out << "output=" << output_dir << "\n";
    out << "models=" << detail::join_commas(model_ids) << "\n";
    out << "epsilon=" << attack.epsilon << "\n";
    out << "lr=" << attack.eta << "\n";
    out << "iters=" << attack.iterations << "\n";
    out << "k=" << attack.objective.k << "\n";
    out << "temperature=" << attack.objective.temperature << "\n";
    out << "seed=" << attack.seed << "\n";
    out << "eval_seed=" << noise_seed() << "\n";
    out << "mask=" << attack.mask.to_string() << "\n";
    out << "prompt=" << attack.prompt << "\n";
    out << "init=" << to_string(attack.init) << "\n";
    out << "step=" << to_string(attack.step_rule) << "\n";
    out << "quantize=" << (quantize ? "true" : "false") << "\n";
    if (train_models) {
      out << "train_models=" << detail::join_commas(*train_models) << "\n";
      out << "heldout_model=" << *heldout_model << "\n";
    }
    return out.str();
  }
};

}  // namespace confuse
