#pragma once

#include "leafnet/layers.hpp"
#include "test_util.hpp"

namespace leafnet::testing {

// Layer-level finite-difference check. The scalar objective is a fixed
// random weighting of the layer output; the analytic gradients come from one
// backward() pass and every input/parameter element is then perturbed with
// central differences. Returns the worst relative error seen.
inline double check_layer_gradients(Layer<double>& layer, TensorD& input, Rng& weight_rng,
                                    Mode mode = Mode::train, double step = 1e-5) {
  Rng fwd_rng(0);
  TensorD out = layer.forward(input, mode, fwd_rng);
  TensorD weights = random_uniform<double>(weight_rng, out.shape());
  layer.zero_grad();
  TensorD input_grad = layer.backward(weights);

  auto loss = [&] {
    Rng r(0);
    TensorD o = layer.forward(input, mode, r);
    return weighted_sum(o, weights);
  };

  double worst = max_fd_error(input, input_grad, loss, step);
  for (auto slot : layer.trainable()) {
    worst = std::max(worst, max_fd_error(*slot.value, *slot.grad, loss, step));
  }
  return worst;
}

}  // namespace leafnet::testing
