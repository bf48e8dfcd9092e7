#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstring>

#include "confuse/attack/pgd.hpp"
#include "confuse/model/toy.hpp"
#include "support/oracles.hpp"

using namespace confuse;

namespace {

// Toy wrapper that starts failing after a set number of forward evaluations.
class FlakyModel final : public SurrogateModel {
 public:
  FlakyModel(ModelPtr inner, int allowed)
      : inner_(std::move(inner)), id_("flaky"), allowed_(allowed) {}
  const std::string& model_id() const override { return id_; }
  const std::string& family() const override { return inner_->family(); }
  int vocab_size() const override { return inner_->vocab_size(); }
  Preprocessing preprocessing() const override { return inner_->preprocessing(); }
  bool thread_safe() const override { return true; }
  LogitVector forward_logits(const Image& x, std::string_view prompt) const override {
    if (++calls_ > allowed_) throw AdapterError(id_, "simulated backend failure");
    return inner_->forward_logits(x, prompt);
  }
  GradGrid input_gradient(const Image& x, std::string_view prompt,
                          const LogitObjective& objective) const override {
    return inner_->input_gradient(x, prompt, objective);
  }

 private:
  ModelPtr inner_;
  std::string id_;
  int allowed_;
  mutable std::atomic<int> calls_{0};
};

AttackConfig toy_config() {
  AttackConfig cfg;
  cfg.epsilon = 1.0f;
  cfg.eta = 0.5;
  cfg.iterations = 10;
  return cfg;
}

}  // namespace

TEST(PgdStep, ZeroGradientLeavesDeltaUnchanged) {
  Perturbation delta = uniform_noise(0.5f, 4, 4, 5);
  GradGrid zero(3, 4, 4, 0.0);
  Mask full = make_mask(MaskGeometry::full(), 4, 4);
  Perturbation out = pgd_step(delta, zero, 0.5, full, 1.0f);
  EXPECT_EQ(std::memcmp(out.px.data.data(), delta.px.data.data(),
                        delta.px.size() * sizeof(float)),
            0);
}

TEST(PgdStep, FullyMaskedGradientLeavesDeltaUnchanged) {
  Perturbation delta = uniform_noise(0.5f, 4, 4, 6);
  GradGrid grad(3, 4, 4, 10.0);
  Mask none = make_mask(MaskGeometry::rect(0, 0, 1, 1), 4, 4);
  for (auto& v : none.cells.data) v = 0;
  Perturbation out = pgd_step(delta, grad, 0.5, none, 1.0f);
  EXPECT_EQ(std::memcmp(out.px.data.data(), delta.px.data.data(),
                        delta.px.size() * sizeof(float)),
            0);
}

TEST(PgdStep, ProjectsAfterTheStep) {
  Perturbation delta = Perturbation::zeros(2, 2, 1.0f);
  GradGrid grad(3, 2, 2, 0.0);
  grad.at(0, 0, 0) = 10.0;  // 0 + 0.5 * 10 = 5, clipped to the budget
  Mask full = make_mask(MaskGeometry::full(), 2, 2);
  Perturbation out = pgd_step(delta, grad, 0.5, full, 1.0f);
  EXPECT_FLOAT_EQ(out.px.at(0, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(out.px.at(1, 1, 1), 0.0f);
}

TEST(PgdStep, SignRuleStepsByEtaTimesSign) {
  Perturbation delta = Perturbation::zeros(2, 2, 1.0f);
  GradGrid grad(3, 2, 2, 0.0);
  grad.at(0, 0, 0) = 0.001;
  grad.at(0, 0, 1) = -42.0;
  Mask full = make_mask(MaskGeometry::full(), 2, 2);
  Perturbation out = pgd_step(delta, grad, 0.05, full, 1.0f, StepRule::SignGradient);
  EXPECT_FLOAT_EQ(out.px.at(0, 0, 0), 0.05f);
  EXPECT_FLOAT_EQ(out.px.at(0, 0, 1), -0.05f);
  EXPECT_FLOAT_EQ(out.px.at(0, 1, 0), 0.0f);
}

TEST(PgdStep, RejectsShapeMismatch) {
  Perturbation delta = Perturbation::zeros(4, 4, 1.0f);
  GradGrid grad(3, 2, 2, 0.0);
  Mask full = make_mask(MaskGeometry::full(), 4, 4);
  EXPECT_THROW(pgd_step(delta, grad, 0.5, full, 1.0f), DimensionError);
}

TEST(SelectBest, ArgmaxWithEarliestTie) {
  EXPECT_EQ(select_best(std::vector<double>{0.5, 2.0, 1.0}), 1);
  EXPECT_EQ(select_best(std::vector<double>{2.0, 2.0}), 0);
  EXPECT_THROW(select_best(std::span<const double>{}), StateError);
}

TEST(SelectBest, AgreesWithLinearScanOracle) {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> trace(1 + rng.next() % 40);
    for (double& v : trace) v = std::floor(rng.next_unit() * 8.0);  // force ties
    EXPECT_EQ(select_best(trace), oracles::argmax_earliest(trace));
  }
}

TEST(Attack, ZeroBudgetReturnsCleanEntropyAndZeroDelta) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0), make_toy_model("b", "fam", 1.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  cfg.epsilon = 0.0f;
  cfg.iterations = 3;
  AttackResult result = attack(ramp, models, cfg);
  EXPECT_EQ(result.best_delta.max_abs(), 0.0f);
  double clean = ensemble_objective(models, ramp, cfg.prompt, cfg.objective).mean;
  for (const TraceEntry& entry : result.trace) {
    EXPECT_DOUBLE_EQ(entry.ensemble_entropy, clean);
  }
}

TEST(Attack, SingleIterationRecordsStartAndSteppedCandidates) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  cfg.iterations = 1;
  cfg.eta = 0.005;  // small enough that one ascent step improves the objective
  AttackResult result = attack(ramp, models, cfg);
  ASSERT_EQ(result.trace.size(), 2u);  // pre-step candidate plus final point
  EXPECT_EQ(result.trace[0].iteration, 0);
  EXPECT_EQ(result.trace[1].iteration, 1);
  // the gradient is nonzero at the ramp, so the projected step must change delta
  EXPECT_GT(result.trace[1].ensemble_entropy, result.trace[0].ensemble_entropy);
  EXPECT_EQ(result.best_iteration, 1);
  EXPECT_GT(result.best_delta.max_abs(), 0.0f);
}

TEST(Attack, TraceHasIterationsPlusOneEntriesAndBestDominates) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0), make_toy_model("b", "fam", 1.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  AttackResult result = attack(ramp, models, cfg);
  ASSERT_EQ(result.trace.size(), static_cast<std::size_t>(cfg.iterations) + 1);
  std::vector<double> entropies;
  for (const auto& e : result.trace) entropies.push_back(e.ensemble_entropy);
  EXPECT_EQ(result.best_iteration, oracles::argmax_earliest(entropies));
  // reported best is at least the iteration-0 (clean-start) entropy
  EXPECT_GE(entropies[static_cast<std::size_t>(result.best_iteration)], entropies[0]);
  // best_image is the perturbed image at the best iterate
  Mask full = make_mask(MaskGeometry::full(), 32, 32);
  Image recomposed = apply_perturbation(ramp, result.best_delta, full);
  EXPECT_EQ(std::memcmp(recomposed.px.data.data(), result.best_image.px.data.data(),
                        recomposed.px.size() * sizeof(float)),
            0);
}

TEST(Attack, PerIterationInvariantsHoldUnderRectMask) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0), make_toy_model("b", "fam", 1.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  cfg.mask = MaskGeometry::rect(8, 8, 16, 16);
  Mask mask = make_mask(cfg.mask, 32, 32);
  int observed = 0;
  attack(ramp, models, cfg, [&](int, const Perturbation& delta, const Image& x_delta) {
    ++observed;
    EXPECT_LE(delta.max_abs(), cfg.epsilon);
    for (float v : x_delta.px.data) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          if (!mask.at(y, x)) EXPECT_EQ(delta.px.at(c, y, x), 0.0f);
        }
      }
    }
  });
  EXPECT_EQ(observed, cfg.iterations + 1);
}

TEST(Attack, DeterministicTracesAndArtifactsForFixedSeed) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0), make_toy_model("b", "fam", 1.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  cfg.init = InitRule::Uniform;
  cfg.seed = 7;
  AttackResult r1 = attack(ramp, models, cfg);
  AttackResult r2 = attack(ramp, models, cfg);
  ASSERT_EQ(r1.trace.size(), r2.trace.size());
  for (std::size_t i = 0; i < r1.trace.size(); ++i) {
    EXPECT_EQ(std::memcmp(&r1.trace[i].ensemble_entropy, &r2.trace[i].ensemble_entropy,
                          sizeof(double)),
              0)
        << "trace diverged at " << i;
  }
  EXPECT_EQ(r1.best_iteration, r2.best_iteration);
  EXPECT_EQ(std::memcmp(r1.best_delta.px.data.data(), r2.best_delta.px.data.data(),
                        r1.best_delta.px.size() * sizeof(float)),
            0);
}

TEST(Attack, UniformInitRespectsMaskAndBudget) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  cfg.init = InitRule::Uniform;
  cfg.epsilon = 0.25f;
  cfg.mask = MaskGeometry::rect(0, 0, 8, 8);
  Mask mask = make_mask(cfg.mask, 32, 32);
  bool checked_init = false;
  attack(ramp, models, cfg, [&](int iter, const Perturbation& delta, const Image&) {
    if (iter != 0) return;
    checked_init = true;
    EXPECT_LE(delta.max_abs(), cfg.epsilon);
    EXPECT_GT(delta.max_abs(), 0.0f);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (!mask.at(y, x)) {
          for (int c = 0; c < 3; ++c) EXPECT_EQ(delta.px.at(c, y, x), 0.0f);
        }
      }
    }
  });
  EXPECT_TRUE(checked_init);
}

TEST(Attack, AdapterFailureCarriesPartialTrace) {
  auto inner = make_toy_model("inner", "fam", 0.0);
  // 2 full iterations of (entropy + gradient's internal forward) = 4 calls,
  // then fail during the third iteration.
  std::vector<ModelPtr> models{std::make_shared<FlakyModel>(inner, 4)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  try {
    attack(ramp, models, cfg);
    FAIL() << "expected AttackAbortedError";
  } catch (const AttackAbortedError& e) {
    EXPECT_EQ(e.model_id(), "flaky");
    EXPECT_EQ(e.partial_trace().size(), 2u);
  }
}

TEST(Attack, RejectsInvalidConfigAndImages) {
  std::vector<ModelPtr> models{make_toy_model("a", "fam", 0.0)};
  Image ramp = Image::gradient_ramp(32, 32);
  AttackConfig cfg = toy_config();
  cfg.eta = 0.0;
  EXPECT_THROW(attack(ramp, models, cfg), ConfigError);
  cfg = toy_config();
  cfg.iterations = 0;
  EXPECT_THROW(attack(ramp, models, cfg), ConfigError);
  cfg = toy_config();
  Image bad = ramp;
  bad.at(0, 0, 0) = 2.0f;
  EXPECT_THROW(attack(bad, models, cfg), DimensionError);
  std::vector<ModelPtr> empty;
  EXPECT_THROW(attack(ramp, empty, cfg), ConfigError);
}
