// Library-level walkthrough: attack the toy ensemble on the gradient test
// image, then score the result against the clean and noise baselines,
// including the held-out model the attack never saw.
#include <cstdio>

#include "confuse/confuse.hpp"

int main() {
  using namespace confuse;

  ModelRegistry registry;
  register_toy_models(registry);
  std::vector<ModelPtr> train = {registry.require("toy-a"), registry.require("toy-b")};
  std::vector<ModelPtr> heldout = {registry.require("toy-c")};

  Image clean = Image::gradient_ramp(32, 32);

  AttackConfig cfg;
  cfg.epsilon = 1.0f;
  cfg.eta = 0.5;
  cfg.iterations = 50;
  cfg.init = InitRule::Uniform;
  cfg.seed = 7;

  AttackResult result = attack(clean, train, cfg);
  std::printf("best iteration %d of %d, ensemble entropy %.4f (ln k = %.4f)\n",
              result.best_iteration, cfg.iterations,
              result.trace[static_cast<std::size_t>(result.best_iteration)].ensemble_entropy,
              std::log(50.0));

  auto show = [&](const char* tag, const std::vector<EcrRecord>& records) {
    for (const EcrRecord& r : records) {
      std::printf("%s %-6s clean %.4f  noise %.4f  adv %.4f  ECR %.2f\n", tag,
                  r.model_id.c_str(), r.h_clean, r.h_noise, r.h_adv, r.ecr);
    }
  };
  show("train  ", evaluate_image(train, clean, result.best_image, cfg.prompt, cfg.objective,
                                 cfg.epsilon, 42));
  show("heldout", evaluate_image(heldout, clean, result.best_image, cfg.prompt, cfg.objective,
                                 cfg.epsilon, 42));
  return 0;
}
