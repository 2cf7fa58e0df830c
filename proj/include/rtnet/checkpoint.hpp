#pragma once

#include <filesystem>

#include "rtnet/da_model.hpp"
#include "rtnet/generators.hpp"
#include "rtnet/selector.hpp"

namespace rtnet {

/// Every trainable network of one run.
struct RtNetModel {
  DaModel da;
  GeneratorPair generators;
  Selector selector;
};

inline constexpr int kCheckpointVersion = 1;

/// File name used inside an output directory: "checkpoint.v1".
std::string checkpoint_filename();

/// Text layout:
///   rtnet-checkpoint 1
///   networks 6
///   then per network, in the order features, classifier, generator_source,
///   generator_target, policy, value:
///     network <name> <layer count>
///     layer <activation> <out> <in>
///     <out> lines of <in> weights, one line of <out> biases
///   end
/// Values carry 17 significant digits so a reload is bit-exact. Optimizer
/// moments are not stored.
void save_checkpoint(const RtNetModel& model, const std::filesystem::path& path);
RtNetModel load_checkpoint(const std::filesystem::path& path);

}  // namespace rtnet
