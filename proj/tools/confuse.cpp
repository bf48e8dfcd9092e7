// confuse: entropy-maximizing adversarial attacks against captioning models,
// with ECR evaluation, sweep grids and report generation.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "confuse/run/runner.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> models;
  std::optional<std::string> mask;
  std::optional<float> epsilon;
  std::optional<double> lr;
  std::optional<int> iterations;
  std::optional<int> k;
  std::optional<double> temperature;

  bool quantize_on = false;
  bool quantize_off = false;

  confuse::CliOverrides overrides() const {
    confuse::CliOverrides ov;
    ov.output = output;
    ov.seed = seed;
    ov.models = models;
    ov.mask = mask;
    ov.epsilon = epsilon;
    ov.lr = lr;
    ov.iterations = iterations;
    ov.k = k;
    ov.temperature = temperature;
    if (quantize_on) ov.quantize = true;
    if (quantize_off) ov.quantize = false;
    return ov;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* config = cmd->add_option("--config", flags.config, "key=value run configuration file");
  if (config_required) config->required();
  cmd->add_option("--out", flags.output, "output directory");
  cmd->add_option("--seed", flags.seed, "run seed (init draw and noise baseline)");
  cmd->add_option("--models", flags.models, "comma separated model ids");
  cmd->add_option("--mask", flags.mask, "full | rect:top,left,h,w");
  cmd->add_option("--epsilon", flags.epsilon, "L-infinity budget");
  cmd->add_option("--lr", flags.lr, "PGD step size");
  cmd->add_option("--iters", flags.iterations, "PGD iterations");
  cmd->add_option("--k", flags.k, "top-k logit truncation");
  cmd->add_option("--temperature", flags.temperature, "softmax temperature");
  auto* q = cmd->add_flag("--quantize", flags.quantize_on, "measure on 8-bit round-tripped images");
  cmd->add_flag("--no-quantize", flags.quantize_off, "measure on float images")->excludes(q);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-maximizing adversarial attacks on captioning surrogates"};
  app.require_subcommand(1);

  CommonFlags attack_flags, eval_flags, sweep_flags;

  auto* attack_cmd = app.add_subcommand("attack", "optimize a perturbation and write artifacts");
  add_common_flags(attack_cmd, attack_flags, true);

  auto* eval_cmd = app.add_subcommand("eval", "score an adversarial/clean image pair");
  std::string adv_path, clean_path;
  eval_cmd->add_option("adversarial", adv_path, "adversarial image (PNG)")->required();
  eval_cmd->add_option("clean", clean_path, "clean image (PNG)")->required();
  add_common_flags(eval_cmd, eval_flags, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "run the epsilon x lr grid");
  std::vector<double> sweep_epsilons{1.0, 0.01};
  std::vector<double> sweep_lrs{0.5, 0.05, 0.005};
  add_common_flags(sweep_cmd, sweep_flags, true);
  sweep_cmd->add_option("--epsilons", sweep_epsilons, "budgets to sweep");
  sweep_cmd->add_option("--lrs", sweep_lrs, "step sizes to sweep");

  auto* report_cmd = app.add_subcommand("report", "aggregate sweeps / label response fixtures");
  std::optional<std::string> sweep_dir, responses_path, phrases_dir;
  report_cmd->add_option("--sweep-dir", sweep_dir, "sweep output directory to aggregate");
  report_cmd->add_option("--responses", responses_path, "tab separated response fixture file");
  report_cmd->add_option("--phrases-dir", phrases_dir,
                         "directory with blindness.txt/refusal.txt/noise.txt");

  CLI11_PARSE(app, argc, argv);

  confuse::ModelRegistry registry;
  confuse::register_toy_models(registry);
  try {
    registry.load_plugins_from_env();  // CONFUSE_ADAPTER_PATH
  } catch (const confuse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return confuse::ExitStatus::kBadConfig;
  }

  if (attack_cmd->parsed()) {
    return confuse::run_attack_command(attack_flags.config, attack_flags.overrides(), registry,
                                       std::cout);
  }
  if (eval_cmd->parsed()) {
    return confuse::run_eval_command(adv_path, clean_path, eval_flags.config,
                                     eval_flags.overrides(), registry, std::cout);
  }
  if (sweep_cmd->parsed()) {
    return confuse::run_sweep_command(sweep_flags.config, sweep_flags.overrides(),
                                      sweep_epsilons, sweep_lrs, registry, std::cout);
  }
  return confuse::run_report_command(sweep_dir, responses_path, phrases_dir, std::cout);
}
