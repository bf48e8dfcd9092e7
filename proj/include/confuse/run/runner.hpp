// Command orchestration behind the CLI: attack runs, evaluation, the
// epsilon x lr sweep grid, and report generation. Each command is a plain
// function returning a process exit status so it can be driven from tests
// without spawning processes.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "confuse/io/delta_io.hpp"
#include "confuse/io/png_io.hpp"
#include "confuse/io/report.hpp"
#include "confuse/model/toy.hpp"

namespace confuse {

struct ExitStatus {
  static constexpr int kOk = 0;
  static constexpr int kFailure = 1;
  static constexpr int kBadConfig = 2;
  static constexpr int kAdapterFailure = 3;
};

// Flag-level overrides applied on top of the config file.
struct CliOverrides {
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> models;
  std::optional<std::string> mask;
  std::optional<float> epsilon;
  std::optional<double> lr;
  std::optional<int> iterations;
  std::optional<int> k;
  std::optional<double> temperature;
  std::optional<bool> quantize;

  void apply(RunConfig& cfg) const {
    if (output) cfg.output_dir = *output;
    if (seed) cfg.attack.seed = *seed;
    if (models) cfg.model_ids = detail::split_commas(*models);
    if (mask) cfg.attack.mask = MaskGeometry::parse(*mask);
    if (epsilon) cfg.attack.epsilon = *epsilon;
    if (lr) cfg.attack.eta = *lr;
    if (iterations) cfg.attack.iterations = *iterations;
    if (k) cfg.attack.objective.k = *k;
    if (temperature) cfg.attack.objective.temperature = *temperature;
    if (quantize) cfg.quantize = *quantize;
  }
};

// Loads a PNG, or generates a deterministic canvas from a spec string:
// "ramp:HxW" (the gradient test image) or "gray:HxW".
inline Image load_canvas(const std::string& path) {
  auto parse_dims = [&path](const std::string& spec) {
    std::istringstream in(spec);
    int h = 0, w = 0;
    char x = 0;
    if (!(in >> h >> x >> w) || x != 'x' || h <= 0 || w <= 0) {
      throw ConfigError("bad canvas spec '" + path + "', expected HxW");
    }
    return std::pair<int, int>(h, w);
  };
  if (path.rfind("ramp:", 0) == 0) {
    auto [h, w] = parse_dims(path.substr(5));
    return Image::gradient_ramp(h, w);
  }
  if (path.rfind("gray:", 0) == 0) {
    auto [h, w] = parse_dims(path.substr(5));
    return Image::solid(h, w, 0.5f);
  }
  return read_png(path);
}

namespace detail {

inline std::vector<ModelPtr> resolve_models(const ModelRegistry& registry,
                                            const std::vector<std::string>& ids) {
  std::vector<ModelPtr> models;
  models.reserve(ids.size());
  for (const std::string& id : ids) models.push_back(registry.require(id));
  return models;
}

inline std::string format_cell_dir(double epsilon, double lr) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "eps%g_lr%g", epsilon, lr);
  return buf;
}

struct EvalOutput {
  std::vector<EcrRecord> records;
  std::vector<EcrRecord> heldout;
};

// Shared by attack/eval/sweep: ECR against clean+noise baselines, optionally
// measured on 8-bit round-tripped images so reports reflect deliverable
// files.
inline EvalOutput evaluate_pair(const RunConfig& cfg, const ModelRegistry& registry,
                                const Image& x_clean, const Image& x_adv) {
  const std::vector<std::string>& attack_ids =
      cfg.train_models ? *cfg.train_models : cfg.model_ids;
  std::vector<ModelPtr> models = resolve_models(registry, attack_ids);

  Image clean = cfg.quantize ? quantize_roundtrip(x_clean) : x_clean;
  Image adv = cfg.quantize ? quantize_roundtrip(x_adv) : x_adv;

  EvalOutput out;
  out.records = evaluate_image(models, clean, adv, cfg.attack.prompt, cfg.attack.objective,
                               cfg.attack.epsilon, cfg.noise_seed());
  if (cfg.heldout_model) {
    std::vector<ModelPtr> heldout = {registry.require(*cfg.heldout_model)};
    out.heldout = evaluate_image(heldout, clean, adv, cfg.attack.prompt, cfg.attack.objective,
                                 cfg.attack.epsilon, cfg.noise_seed());
  }
  return out;
}

inline void write_eval_reports(const RunConfig& cfg, const EvalOutput& eval,
                               const std::filesystem::path& dir) {
  write_ecr_jsonl((dir / "ecr_report.jsonl").string(), eval.records, cfg, eval.heldout);
  EcrGridCell cell{cfg.attack.epsilon, cfg.attack.eta, eval.records};
  std::string text = format_ecr_grid(std::span<const EcrGridCell>(&cell, 1));
  text += "\n";
  text += format_ecr_detail(eval.records, eval.heldout);
  std::ofstream txt(dir / "ecr_report.txt", std::ios::trunc);
  if (!txt) throw IoError("cannot write ecr_report.txt");
  txt << text;
}

// The attack pipeline minus argument handling; used by attack and sweep.
inline int attack_pipeline(const RunConfig& cfg, const ModelRegistry& registry,
                           std::ostream& log) {
  const std::vector<std::string>& attack_ids =
      cfg.train_models ? *cfg.train_models : cfg.model_ids;
  std::vector<ModelPtr> models = resolve_models(registry, attack_ids);
  Image x_clean = load_canvas(cfg.image_path);
  x_clean.validate();

  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo(dir / "config_echo.cfg", std::ios::trunc);
    if (!echo) throw IoError("cannot write config_echo.cfg");
    echo << cfg.echo();
  }

  AttackResult result;
  try {
    result = attack(x_clean, models, cfg.attack);
  } catch (const AttackAbortedError& e) {
    // Keep whatever was recorded so the failure can be inspected.
    AttackResult partial;
    partial.config = cfg.attack;
    partial.trace = e.partial_trace();
    write_trace_jsonl((dir / "trace.jsonl").string(), partial, cfg, attack_ids);
    log << "error: " << e.what() << "\n";
    return ExitStatus::kAdapterFailure;
  }

  write_png((dir / "adversarial.png").string(), result.best_image);
  save_delta((dir / "perturbation.delta").string(), result.best_delta.px);
  write_trace_jsonl((dir / "trace.jsonl").string(), result, cfg, attack_ids);

  EvalOutput eval = evaluate_pair(cfg, registry, x_clean, result.best_image);
  write_eval_reports(cfg, eval, dir);

  log << "best iteration " << result.best_iteration << ", ensemble entropy "
      << result.trace[static_cast<std::size_t>(result.best_iteration)].ensemble_entropy
      << ", artifacts in " << dir.string() << "\n";
  return ExitStatus::kOk;
}

}  // namespace detail

inline int run_attack_command(const std::string& config_path, const CliOverrides& overrides,
                              const ModelRegistry& registry, std::ostream& log) {
  try {
    RunConfig cfg = RunConfig::parse_file(config_path);
    overrides.apply(cfg);
    if (cfg.image_path.empty()) throw ConfigError("config needs image=<path>");
    cfg.validate(registry);
    return detail::attack_pipeline(cfg, registry, log);
  } catch (const AdapterError& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kAdapterFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kBadConfig;
  }
}

inline int run_eval_command(const std::string& adv_path, const std::string& clean_path,
                            const std::string& config_path, const CliOverrides& overrides,
                            const ModelRegistry& registry, std::ostream& log) {
  try {
    RunConfig cfg = RunConfig::parse_file(config_path);
    overrides.apply(cfg);
    cfg.validate(registry);
    Image adv = load_canvas(adv_path);
    Image clean = load_canvas(clean_path);
    if (!adv.px.same_shape(clean.px)) {
      throw DimensionError("adversarial image is " + adv.px.shape_string() +
                           " but clean image is " + clean.px.shape_string());
    }
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    detail::EvalOutput eval = detail::evaluate_pair(cfg, registry, clean, adv);
    detail::write_eval_reports(cfg, eval, dir);
    EcrGridCell cell{cfg.attack.epsilon, cfg.attack.eta, eval.records};
    log << format_ecr_grid(std::span<const EcrGridCell>(&cell, 1));
    if (mean_ecr(eval.records) <= 1.0) log << "(no effect: mean ECR <= 1)\n";
    return ExitStatus::kOk;
  } catch (const AdapterError& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kAdapterFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kBadConfig;
  }
}

// Runs the full epsilon x lr grid, one subdirectory per cell, and writes an
// aggregated grid table.
inline int run_sweep_command(const std::string& config_path, const CliOverrides& overrides,
                             const std::vector<double>& epsilons, const std::vector<double>& lrs,
                             const ModelRegistry& registry, std::ostream& log) {
  try {
    RunConfig base = RunConfig::parse_file(config_path);
    overrides.apply(base);
    if (base.image_path.empty()) throw ConfigError("config needs image=<path>");
    base.validate(registry);
    if (epsilons.empty() || lrs.empty()) throw ConfigError("sweep needs epsilons and lrs");

    std::filesystem::path root(base.output_dir);
    std::vector<EcrGridCell> cells;
    for (double eps : epsilons) {
      for (double lr : lrs) {
        RunConfig cfg = base;
        cfg.attack.epsilon = static_cast<float>(eps);
        cfg.attack.eta = lr;
        cfg.output_dir = (root / detail::format_cell_dir(eps, lr)).string();
        int status = detail::attack_pipeline(cfg, registry, log);
        if (status != ExitStatus::kOk) return status;
        detail::EvalOutput eval = detail::evaluate_pair(
            cfg, registry, load_canvas(cfg.image_path),
            read_png((std::filesystem::path(cfg.output_dir) / "adversarial.png").string()));
        cells.push_back(EcrGridCell{eps, lr, eval.records});
      }
    }
    std::string table = format_ecr_grid(cells);
    std::ofstream txt(root / "sweep_summary.txt", std::ios::trunc);
    txt << table;
    std::ofstream jsonl(root / "sweep_summary.jsonl", std::ios::trunc);
    for (const EcrGridCell& cell : cells) {
      Json j{{"epsilon", cell.epsilon}, {"lr", cell.lr}, {"mean_ecr", mean_ecr(cell.records)}};
      for (const EcrRecord& r : cell.records) j["ecr"][r.model_id] = r.ecr;
      jsonl << j.dump() << "\n";
    }
    log << table;
    return ExitStatus::kOk;
  } catch (const AdapterError& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kAdapterFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kBadConfig;
  }
}

struct ResponseFixtureRow {
  std::string model_id;
  std::string outcome;  // hallucination | refusal | no_effect | auto
  std::string mode;     // blindness | ... | auto
  std::vector<std::string> keywords;
  std::string response;
};

// Tab-separated: model_id, outcome, mode, keywords (comma separated), response.
// "auto" asks the heuristic classifiers to fill the value in.
inline std::vector<ResponseFixtureRow> parse_responses_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open responses file '" + path + "'");
  std::vector<ResponseFixtureRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (fields.size() < 4) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) break;
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() < 4) throw IoError("bad responses row: '" + line + "'");
    ResponseFixtureRow row;
    row.model_id = fields[0];
    row.outcome = fields[1];
    row.mode = fields[2];
    row.keywords = detail::split_commas(fields[3]);
    row.response = line.substr(start);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline OutcomeLabel parse_outcome(const std::string& text) {
  if (text == "hallucination" || text == "✓") return OutcomeLabel::Hallucination;
  if (text == "refusal" || text == "△") return OutcomeLabel::Refusal;
  if (text == "no_effect" || text == "noeffect" || text == "·") return OutcomeLabel::NoEffect;
  throw ConfigError("unknown outcome label '" + text + "'");
}

// Report generation: aggregate a sweep directory and/or label a responses
// fixture. Hand-filled outcome labels win over the heuristic.
inline int run_report_command(const std::optional<std::string>& sweep_dir,
                              const std::optional<std::string>& responses_path,
                              const std::optional<std::string>& phrases_dir,
                              std::ostream& log) {
  try {
    if (!sweep_dir && !responses_path) {
      throw ConfigError("report needs --sweep-dir and/or --responses");
    }
    if (sweep_dir) {
      std::filesystem::path summary = std::filesystem::path(*sweep_dir) / "sweep_summary.txt";
      std::ifstream in(summary);
      if (!in) throw IoError("no sweep summary at '" + summary.string() + "'");
      log << in.rdbuf();
    }
    if (responses_path) {
      PhraseLists loaded;
      if (phrases_dir) loaded = PhraseLists::load_dir(*phrases_dir);
      const PhraseLists& phrases = phrases_dir ? loaded : PhraseLists::defaults();
      std::vector<ResponseFixtureRow> fixture = parse_responses_file(*responses_path);
      std::vector<ResponseRow> rows;
      for (const ResponseFixtureRow& fx : fixture) {
        ResponseRow row;
        row.model_id = fx.model_id;
        row.response = fx.response;
        row.outcome = fx.outcome == "auto" ? label_outcome(fx.response, fx.keywords, phrases)
                                           : parse_outcome(fx.outcome);
        if (fx.mode == "auto") {
          try {
            std::optional<std::vector<std::string>> ref;
            if (!fx.keywords.empty()) ref = fx.keywords;
            row.mode = to_string(classify_confusion_mode(fx.response, ref, phrases));
          } catch (const ClassificationInputError&) {
            row.mode = "(needs reference)";
          }
        } else {
          row.mode = fx.mode;
        }
        rows.push_back(std::move(row));
      }
      log << format_responses_table(rows);
    }
    return ExitStatus::kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return ExitStatus::kBadConfig;
  }
}

}  // namespace confuse
