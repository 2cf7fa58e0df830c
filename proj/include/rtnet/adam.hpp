#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rtnet/dense_network.hpp"

namespace rtnet {

/// Adam moment accumulators for one network.
template <typename Scalar>
struct AdamState {
  std::vector<LayerGradient<Scalar>> first;
  std::vector<LayerGradient<Scalar>> second;
  std::int64_t step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  AdamState() = default;
  explicit AdamState(const DenseNetwork<Scalar>& net) {
    first = net.zero_gradients().layers;
    second = first;
  }
};

/// One bias-corrected Adam descent step. A zero learning rate still advances
/// the moments and the step counter but leaves the parameters untouched.
template <typename Scalar>
void adam_step(DenseNetwork<Scalar>& net, const Gradients<Scalar>& grads, AdamState<Scalar>& state, Scalar lr) {
  auto& layers = net.layers();
  if (!(lr >= Scalar(0))) throw UsageError("adam_step: learning rate must be non-negative");
  if (grads.layers.size() != layers.size() || state.first.size() != layers.size())
    throw UsageError("adam_step: gradient/state layer count does not match the network");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    require_shape(grads.layers[k].weight, layers[k].out(), layers[k].in(), "adam_step weight gradient");
    require_shape(grads.layers[k].bias, layers[k].out(), 1, "adam_step bias gradient");
    require_shape(state.first[k].weight, layers[k].out(), layers[k].in(), "adam_step moment");
  }

  ++state.step;
  const Scalar t = static_cast<Scalar>(state.step);
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, t);
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, t);
  const auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (Scalar(1) - state.beta1) * g;
    v = state.beta2 * v + (Scalar(1) - state.beta2) * g.cwiseAbs2();
    if (lr == Scalar(0)) return;
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weight, grads.layers[k].weight, state.first[k].weight, state.second[k].weight);
    update(layers[k].bias, grads.layers[k].bias, state.first[k].bias, state.second[k].bias);
    require_finite(layers[k].weight, "adam_step");
    require_finite(layers[k].bias, "adam_step");
  }
}

}  // namespace rtnet
