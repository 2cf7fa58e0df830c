#include "rtnet/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rtnet {

GeneratorPair::GeneratorPair(Eigen::Index feature_dim, Eigen::Index hidden, Eigen::Index input_dim, Rng& rng)
    : GeneratorPair(Network({{feature_dim, hidden, Activation::kRelu}, {hidden, input_dim, Activation::kLinear}}, rng),
                    Network({{feature_dim, hidden, Activation::kRelu}, {hidden, input_dim, Activation::kLinear}}, rng)) {}

GeneratorPair::GeneratorPair(Network s, Network t)
    : source(std::move(s)), target(std::move(t)), source_opt(source), target_opt(target) {
  if (source.input_dim() != target.input_dim() || source.output_dim() != target.output_dim())
    throw ConfigError("GeneratorPair: generators disagree on shape");
}

ColumnXd reconstruction_error(const Network& generator, const Network& features, const TensorXd& x) {
  if (generator.output_dim() != x.cols())
    throw ConfigError("reconstruction_error: generator output does not match the input dimension");
  const TensorXd recon = generator.evaluate(features.evaluate(x));
  return (x - recon).rowwise().squaredNorm();
}

double compute_reward(const Network& target_generator, const Network& features, const TensorXd& selected_source) {
  if (selected_source.rows() == 0) throw UsageError("compute_reward: no selected samples");
  // floored at the smallest normal double so huge errors never give exactly 0
  const double r = std::exp(-reconstruction_error(target_generator, features, selected_source).mean());
  return std::max(r, std::numeric_limits<double>::min());
}

namespace {

// Mean squared reconstruction error of x through G(F(x)) and its G gradients.
double reconstruction_term(const Network& generator, const TensorXd& z, const TensorXd& x, NetGradients& grad) {
  const NetTrace trace = generator.forward(z);
  const TensorXd residual = x - trace.output();
  const double n = static_cast<double>(x.rows());
  grad = generator.backward(trace, (-2.0 / n) * residual);
  return residual.squaredNorm() / n;
}

}  // namespace

ReconstructionObjective generator_objective(const GeneratorPair& pair, const Network& features,
                                            const TensorXd& selected_source, const TensorXd& target) {
  if (selected_source.rows() == 0 || target.rows() == 0) throw UsageError("generator_objective: empty batch");
  ReconstructionObjective obj;
  obj.source = reconstruction_term(pair.source, features.evaluate(selected_source), selected_source, obj.source_grad);
  obj.target = reconstruction_term(pair.target, features.evaluate(target), target, obj.target_grad);
  return obj;
}

ReconstructionObjective update_generators(GeneratorPair& pair, const Network& features,
                                          const TensorXd& selected_source, const TensorXd& target, double lr) {
  ReconstructionObjective obj = generator_objective(pair, features, selected_source, target);
  adam_step(pair.source, obj.source_grad, pair.source_opt, lr);
  adam_step(pair.target, obj.target_grad, pair.target_opt, lr);
  return obj;
}

void pretrain_generators(GeneratorPair& pair, const Network& features, const TensorXd& source,
                         const TensorXd& target, int steps, Eigen::Index batch_size, double lr, Rng& rng) {
  if (steps <= 0) return;
  if (source.rows() == 0 || target.rows() == 0) throw UsageError("pretrain_generators: empty data");
  const auto draw = [&](const TensorXd& data) {
    const Eigen::Index n = std::min(batch_size, data.rows());
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(n));
    return gather_rows(data, idx);
  };
  for (int s = 0; s < steps; ++s) {
    const TensorXd xs = draw(source);
    const TensorXd xt = draw(target);
    update_generators(pair, features, xs, xt, lr);
  }
}

}  // namespace rtnet
