// Central finite differences as an independent gradient oracle.
#pragma once

#include "confuse/model/surrogate.hpp"

namespace confuse {

// (obj(x + h e_i) - obj(x - h e_i)) / (2h) per pixel. Evaluation points are
// fed to the raw model without clamping to [0,1], so the model gradient is
// tested in isolation from the pixel clip of the attack composition.
inline GradGrid finite_diff_gradient(const SurrogateModel& model, const Image& x,
                                     std::string_view prompt, const LogitObjective& objective,
                                     double h) {
  if (!(h > 0.0)) throw ConfigError("finite difference step must be > 0");
  GradGrid grad(x.channels(), x.height(), x.width(), 0.0);
  Image probe = x;
  for (std::size_t i = 0; i < probe.px.data.size(); ++i) {
    const float original = probe.px.data[i];
    // Pixels are float32, so the realized step differs from h by rounding;
    // divide by the step that was actually applied.
    const float up = static_cast<float>(original + h);
    const float down = static_cast<float>(original - h);
    probe.px.data[i] = up;
    double plus = objective.value(model.forward_logits(probe, prompt));
    probe.px.data[i] = down;
    double minus = objective.value(model.forward_logits(probe, prompt));
    probe.px.data[i] = original;
    grad.data[i] = (plus - minus) / (static_cast<double>(up) - static_cast<double>(down));
  }
  return grad;
}

}  // namespace confuse
