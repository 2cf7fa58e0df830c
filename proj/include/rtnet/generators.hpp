#pragma once

#include "rtnet/adam.hpp"
#include "rtnet/dense_network.hpp"
#include "rtnet/random.hpp"

namespace rtnet {

/// Dense decoders mapping adapted features back to input space.
struct GeneratorPair {
  Network source;  // G_s
  Network target;  // G_t
  AdamState<double> source_opt;
  AdamState<double> target_opt;

  GeneratorPair() = default;
  GeneratorPair(Eigen::Index feature_dim, Eigen::Index hidden, Eigen::Index input_dim, Rng& rng);
  GeneratorPair(Network source, Network target);
};

/// ||x_i - G(F(x_i))||^2 for every row.
ColumnXd reconstruction_error(const Network& generator, const Network& features, const TensorXd& x);

/// exp(-mean reconstruction error of the selected samples under G_t); in (0, 1].
double compute_reward(const Network& target_generator, const Network& features, const TensorXd& selected_source);

struct ReconstructionObjective {
  double source = 0;  // mean source reconstruction error under G_s
  double target = 0;  // mean target reconstruction error under G_t
  NetGradients source_grad;
  NetGradients target_grad;
};

/// Mean source reconstruction through G_s plus mean target reconstruction
/// through G_t, with gradients for the generators only (F is held fixed).
ReconstructionObjective generator_objective(const GeneratorPair& pair, const Network& features,
                                            const TensorXd& selected_source, const TensorXd& target);

/// One Adam step on both generators; returns the pre-update objective.
ReconstructionObjective update_generators(GeneratorPair& pair, const Network& features,
                                          const TensorXd& selected_source, const TensorXd& target, double lr);

/// `steps` generator updates on random batches drawn from all of the data.
void pretrain_generators(GeneratorPair& pair, const Network& features, const TensorXd& source,
                         const TensorXd& target, int steps, Eigen::Index batch_size, double lr, Rng& rng);

}  // namespace rtnet
