// Adapter plugin used by the test suite: registers one extra toy variant and
// one deliberately failing adapter through the documented entry point.
#include <memory>

#include "confuse/model/toy.hpp"

namespace {

class BoomModel final : public confuse::SurrogateModel {
 public:
  const std::string& model_id() const override { return id_; }
  const std::string& family() const override { return family_; }
  int vocab_size() const override { return 64; }
  confuse::Preprocessing preprocessing() const override {
    return confuse::Preprocessing{32, 32, 1.0, 0.0};
  }
  bool thread_safe() const override { return true; }
  confuse::LogitVector forward_logits(const confuse::Image&, std::string_view) const override {
    throw confuse::AdapterError(id_, "backend unavailable");
  }
  confuse::GradGrid input_gradient(const confuse::Image&, std::string_view,
                                   const confuse::LogitObjective&) const override {
    throw confuse::CapabilityError(id_, "no gradients");
  }

 private:
  std::string id_ = "toy-boom";
  std::string family_ = "boom";
};

}  // namespace

extern "C" void confuse_register_models(confuse::ModelRegistry* registry) {
  registry->add(confuse::make_toy_model("toy-x", "toyX", 3.0));
  registry->add(std::make_shared<BoomModel>());
}
