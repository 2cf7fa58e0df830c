#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rtnet/tensor.hpp"

namespace rtnet {

enum class Activation { kLinear, kRelu, kSigmoid, kSoftmax };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "softmax") return Activation::kSoftmax;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

struct LayerSpec {
  Eigen::Index in = 0;
  Eigen::Index out = 0;
  Activation activation = Activation::kLinear;
};

template <typename Scalar>
struct DenseLayer {
  Tensor<Scalar> weight;  // out x in
  Column<Scalar> bias;    // out
  Activation activation = Activation::kLinear;

  Eigen::Index in() const { return weight.cols(); }
  Eigen::Index out() const { return weight.rows(); }
};

/// Row-wise numerically stable softmax.
template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& logits) {
  Tensor<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar peak = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - peak).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> apply_activation(Activation a, const Tensor<Scalar>& pre) {
  switch (a) {
    case Activation::kLinear: return pre;
    case Activation::kRelu: return pre.cwiseMax(Scalar(0));
    case Activation::kSigmoid: return (Scalar(1) / (Scalar(1) + (-pre.array()).exp())).matrix();
    case Activation::kSoftmax: return softmax_rows(pre);
  }
  return pre;
}

/// Gradient of one layer's parameters.
template <typename Scalar>
struct LayerGradient {
  Tensor<Scalar> weight;
  Column<Scalar> bias;
};

enum class ParamKind { kWeight, kBias };

struct ParamId {
  std::size_t layer = 0;
  ParamKind kind = ParamKind::kWeight;
};

/// Gradients for every parameter of one network, keyed by (layer, weight|bias),
/// plus the gradient with respect to the network input.
template <typename Scalar>
struct Gradients {
  std::vector<LayerGradient<Scalar>> layers;
  Tensor<Scalar> input;

  /// Flat view of one parameter's gradient (weights in row-major order).
  Eigen::Map<Column<Scalar>> at(ParamId id) {
    auto& g = layers.at(id.layer);
    if (id.kind == ParamKind::kWeight) return {g.weight.data(), g.weight.size()};
    return {g.bias.data(), g.bias.size()};
  }

  Gradients& operator+=(const Gradients& o) {
    if (o.layers.size() != layers.size()) throw UsageError("Gradients: layer count mismatch");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      require_shape(o.layers[k].weight, layers[k].weight.rows(), layers[k].weight.cols(), "Gradients");
      layers[k].weight += o.layers[k].weight;
      layers[k].bias += o.layers[k].bias;
    }
    return *this;
  }

  Gradients& operator*=(Scalar s) {
    for (auto& g : layers) {
      g.weight *= s;
      g.bias *= s;
    }
    input *= s;
    return *this;
  }

  /// Parameters flattened layer by layer, weights (row-major) before biases.
  Column<Scalar> flatten() const {
    Eigen::Index total = 0;
    for (const auto& g : layers) total += g.weight.size() + g.bias.size();
    Column<Scalar> flat(total);
    Eigen::Index off = 0;
    for (const auto& g : layers) {
      flat.segment(off, g.weight.size()) = g.weight.template reshaped<Eigen::RowMajor>();
      off += g.weight.size();
      flat.segment(off, g.bias.size()) = g.bias;
      off += g.bias.size();
    }
    return flat;
  }
};

/// Everything backward needs from one forward pass.
template <typename Scalar>
struct ForwardTrace {
  std::vector<Tensor<Scalar>> inputs;       // input to layer k
  std::vector<Tensor<Scalar>> activations;  // output of layer k

  bool empty() const { return activations.empty(); }
  const Tensor<Scalar>& output() const {
    if (empty()) throw UsageError("ForwardTrace: no recorded forward pass");
    return activations.back();
  }
};

/// A stack of fully connected layers, each computing activation(x W^T + b) on a
/// batch of row vectors. Evaluation is const and safe to share across threads;
/// only the optimizer mutates the parameters.
template <typename Scalar>
class DenseNetwork {
 public:
  DenseNetwork() = default;

  /// Glorot-uniform weights, zero biases.
  template <typename Rng>
  DenseNetwork(const std::vector<LayerSpec>& specs, Rng& rng) {
    validate(specs);
    for (const auto& s : specs) {
      DenseLayer<Scalar> layer;
      const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      layer.weight.resize(s.out, s.in);
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = Scalar(dist(rng));
      layer.bias = Column<Scalar>::Zero(s.out);
      layer.activation = s.activation;
      layers_.push_back(std::move(layer));
    }
  }

  explicit DenseNetwork(std::vector<DenseLayer<Scalar>> layers) : layers_(std::move(layers)) {
    std::vector<LayerSpec> specs;
    for (const auto& l : layers_) {
      if (l.bias.size() != l.out()) throw ConfigError("DenseNetwork: bias size does not match layer output");
      specs.push_back({l.in(), l.out(), l.activation});
    }
    validate(specs);
  }

  static void validate(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw ConfigError("DenseNetwork: no layers");
    for (std::size_t k = 0; k < specs.size(); ++k) {
      if (specs[k].in <= 0 || specs[k].out <= 0) throw ConfigError("DenseNetwork: non-positive layer size");
      if (k + 1 < specs.size()) {
        if (specs[k].out != specs[k + 1].in)
          throw ConfigError("DenseNetwork: layer " + std::to_string(k) + " output does not feed layer " +
                            std::to_string(k + 1));
        if (specs[k].activation == Activation::kSoftmax)
          throw ConfigError("DenseNetwork: softmax is only allowed on the final layer");
      }
    }
  }

  Eigen::Index input_dim() const { return layers_.front().in(); }
  Eigen::Index output_dim() const { return layers_.back().out(); }
  std::size_t depth() const { return layers_.size(); }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }
  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }

  Eigen::Index param_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Output only; no trace is kept.
  Tensor<Scalar> evaluate(const Tensor<Scalar>& x) const { return forward(x).activations.back(); }

  ForwardTrace<Scalar> forward(const Tensor<Scalar>& x) const {
    if (layers_.empty()) throw UsageError("DenseNetwork: forward on an empty network");
    if (x.cols() != input_dim())
      throw ConfigError("DenseNetwork: input has " + std::to_string(x.cols()) + " columns, expected " +
                        std::to_string(input_dim()));
    ForwardTrace<Scalar> trace;
    trace.inputs.reserve(layers_.size());
    trace.activations.reserve(layers_.size());
    const Tensor<Scalar>* current = &x;
    for (const auto& layer : layers_) {
      trace.inputs.push_back(*current);
      Tensor<Scalar> pre = *current * layer.weight.transpose();
      pre.rowwise() += layer.bias.transpose();
      trace.activations.push_back(apply_activation(layer.activation, pre));
      current = &trace.activations.back();
    }
    require_finite(trace.activations.back(), "DenseNetwork::forward");
    return trace;
  }

  /// Reverse-mode gradients of a scalar loss given dLoss/dOutput for the traced batch.
  Gradients<Scalar> backward(const ForwardTrace<Scalar>& trace, const Tensor<Scalar>& upstream) const {
    if (trace.empty() || trace.activations.size() != layers_.size())
      throw UsageError("DenseNetwork::backward: no recorded forward pass for this network");
    const auto& out = trace.activations.back();
    require_shape(upstream, out.rows(), out.cols(), "DenseNetwork::backward upstream");

    Gradients<Scalar> grads;
    grads.layers.resize(layers_.size());
    Tensor<Scalar> delta = upstream;
    for (std::size_t k = layers_.size(); k-- > 0;) {
      const auto& layer = layers_[k];
      const auto& act = trace.activations[k];
      Tensor<Scalar> dpre;
      switch (layer.activation) {
        case Activation::kLinear: dpre = delta; break;
        case Activation::kRelu: dpre = (act.array() > Scalar(0)).select(delta, Scalar(0)); break;
        case Activation::kSigmoid: dpre = (delta.array() * act.array() * (Scalar(1) - act.array())).matrix(); break;
        case Activation::kSoftmax: {
          const Column<Scalar> dot = (delta.array() * act.array()).rowwise().sum();
          dpre = (act.array() * (delta.colwise() - dot).array()).matrix();
          break;
        }
      }
      grads.layers[k].weight = dpre.transpose() * trace.inputs[k];
      grads.layers[k].bias = dpre.colwise().sum().transpose();
      delta = dpre * layer.weight;
    }
    grads.input = std::move(delta);
    return grads;
  }

  Gradients<Scalar> zero_gradients() const {
    Gradients<Scalar> g;
    for (const auto& l : layers_) g.layers.push_back({Tensor<Scalar>::Zero(l.out(), l.in()), Column<Scalar>::Zero(l.out())});
    return g;
  }

  /// Same ordering as Gradients::flatten.
  Column<Scalar> parameters() const {
    Column<Scalar> flat(param_count());
    Eigen::Index off = 0;
    for (const auto& l : layers_) {
      flat.segment(off, l.weight.size()) = l.weight.template reshaped<Eigen::RowMajor>();
      off += l.weight.size();
      flat.segment(off, l.bias.size()) = l.bias;
      off += l.bias.size();
    }
    return flat;
  }

  void set_parameters(const Column<Scalar>& flat) {
    if (flat.size() != param_count()) throw UsageError("DenseNetwork::set_parameters: size mismatch");
    Eigen::Index off = 0;
    for (auto& l : layers_) {
      l.weight.template reshaped<Eigen::RowMajor>() = flat.segment(off, l.weight.size());
      off += l.weight.size();
      l.bias = flat.segment(off, l.bias.size());
      off += l.bias.size();
    }
  }

  bool operator==(const DenseNetwork& o) const {
    if (layers_.size() != o.layers_.size()) return false;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& a = layers_[k];
      const auto& b = o.layers_[k];
      if (a.activation != b.activation || a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
          a.weight != b.weight || a.bias != b.bias)
        return false;
    }
    return true;
  }

 private:
  std::vector<DenseLayer<Scalar>> layers_;
};

using Network = DenseNetwork<double>;
using NetGradients = Gradients<double>;
using NetTrace = ForwardTrace<double>;

}  // namespace rtnet
