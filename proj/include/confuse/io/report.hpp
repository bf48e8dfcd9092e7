// Report emission: machine-readable JSON lines plus aligned plain-text tables
// shaped like the ECR grids and outcome tables of the evaluation protocol.
#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "confuse/eval/ecr.hpp"
#include "confuse/eval/taxonomy.hpp"
#include "confuse/io/run_config.hpp"

namespace confuse {

using Json = nlohmann::json;

inline Json config_json(const RunConfig& cfg) {
  Json j;
  j["image"] = cfg.image_path;
  j["output"] = cfg.output_dir;
  j["models"] = cfg.model_ids;
  j["epsilon"] = cfg.attack.epsilon;
  j["lr"] = cfg.attack.eta;
  j["iters"] = cfg.attack.iterations;
  j["k"] = cfg.attack.objective.k;
  j["temperature"] = cfg.attack.objective.temperature;
  j["seed"] = cfg.attack.seed;
  j["eval_seed"] = cfg.noise_seed();
  j["mask"] = cfg.attack.mask.to_string();
  j["prompt"] = cfg.attack.prompt;
  j["init"] = to_string(cfg.attack.init);
  j["step"] = to_string(cfg.attack.step_rule);
  j["quantize"] = cfg.quantize;
  if (cfg.train_models) {
    j["train_models"] = *cfg.train_models;
    j["heldout_model"] = *cfg.heldout_model;
  }
  return j;
}

inline void write_trace_jsonl(const std::string& path, const AttackResult& result,
                              const RunConfig& cfg, std::span<const std::string> model_ids) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << Json{{"config", config_json(cfg)}}.dump() << "\n";
  for (const TraceEntry& entry : result.trace) {
    Json per_model = Json::object();
    for (std::size_t j = 0; j < model_ids.size() && j < entry.per_model.size(); ++j) {
      per_model[model_ids[j]] = entry.per_model[j];
    }
    out << Json{{"iteration", entry.iteration},
                {"ensemble_entropy", entry.ensemble_entropy},
                {"per_model", per_model}}
               .dump()
        << "\n";
  }
  out << Json{{"best_iteration", result.best_iteration}}.dump() << "\n";
}

inline void write_ecr_jsonl(const std::string& path, std::span<const EcrRecord> records,
                            const RunConfig& cfg,
                            std::span<const EcrRecord> heldout_records = {}) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << Json{{"config", config_json(cfg)}}.dump() << "\n";
  for (const EcrRecord& r : records) {
    out << Json{{"model_id", r.model_id},
                {"h_adv", r.h_adv},
                {"h_clean", r.h_clean},
                {"h_noise", r.h_noise},
                {"ecr", r.ecr}}
               .dump()
        << "\n";
  }
  out << Json{{"mean_ecr", mean_ecr(records)}}.dump() << "\n";
  for (const EcrRecord& r : heldout_records) {
    out << Json{{"model_id", r.model_id},
                {"h_adv", r.h_adv},
                {"h_clean", r.h_clean},
                {"h_noise", r.h_noise},
                {"ecr", r.ecr},
                {"heldout", true}}
               .dump()
        << "\n";
  }
}

namespace detail {

inline std::string fixed(double v, int precision, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, precision, v);
  return buf;
}

inline std::string padded(const std::string& s, int width) {
  if (static_cast<int>(s.size()) >= width) return s;
  return std::string(static_cast<std::size_t>(width) - s.size(), ' ') + s;
}

}  // namespace detail

struct EcrGridCell {
  double epsilon = 0.0;
  double lr = 0.0;
  std::vector<EcrRecord> records;
};

// Aligned text grid with one row per (epsilon, lr) cell and one ECR column
// per model plus the ensemble mean, mirroring the published table layout.
inline std::string format_ecr_grid(std::span<const EcrGridCell> cells,
                                   const std::string& title = "Effective Confusion Ratio (ECR)") {
  if (cells.empty()) throw StateError("no cells to format");
  const int id_width = 10;
  std::string out = title + "\n";
  out += detail::padded("eps", 8) + detail::padded("lr", 9);
  for (const EcrRecord& r : cells.front().records) out += detail::padded(r.model_id, id_width);
  out += detail::padded("mean", id_width) + "\n";
  for (const EcrGridCell& cell : cells) {
    out += detail::fixed(cell.epsilon, 3, 8);
    out += detail::fixed(cell.lr, 4, 9);
    for (const EcrRecord& r : cell.records) out += detail::fixed(r.ecr, 2, id_width);
    out += detail::fixed(mean_ecr(cell.records), 2, id_width);
    out += "\n";
  }
  return out;
}

// Per-model entropy detail for a single evaluation.
inline std::string format_ecr_detail(std::span<const EcrRecord> records,
                                     std::span<const EcrRecord> heldout_records = {}) {
  std::string out;
  out += detail::padded("model", 12) + detail::padded("h_clean", 10) +
         detail::padded("h_noise", 10) + detail::padded("h_adv", 10) +
         detail::padded("ecr", 8) + "\n";
  auto row = [&out](const EcrRecord& r, const char* tag) {
    out += detail::padded(r.model_id, 12);
    out += detail::fixed(r.h_clean, 4, 10);
    out += detail::fixed(r.h_noise, 4, 10);
    out += detail::fixed(r.h_adv, 4, 10);
    out += detail::fixed(r.ecr, 2, 8);
    out += tag;
    out += "\n";
  };
  for (const EcrRecord& r : records) row(r, "");
  out += detail::padded("mean", 12) + detail::padded("", 30) +
         detail::fixed(mean_ecr(records), 2, 8) + "\n";
  for (const EcrRecord& r : heldout_records) row(r, "  (held out)");
  return out;
}

struct ResponseRow {
  std::string model_id;
  OutcomeLabel outcome = OutcomeLabel::Hallucination;
  std::string mode;  // empty when not classified
  std::string response;
};

inline std::string format_responses_table(std::span<const ResponseRow> rows) {
  std::string out;
  out += detail::padded("model", 14) + "  outcome  mode             response\n";
  for (const ResponseRow& row : rows) {
    std::string excerpt = row.response.substr(0, 48);
    if (row.response.size() > 48) excerpt += "...";
    out += detail::padded(row.model_id, 14);
    out += "  ";
    out += symbol_of(row.outcome);
    out += "        ";
    std::string mode = row.mode.empty() ? "-" : row.mode;
    mode.resize(16, ' ');
    out += mode + " " + excerpt + "\n";
  }
  return out;
}

}  // namespace confuse
