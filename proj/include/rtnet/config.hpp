#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "rtnet/da_model.hpp"
#include "rtnet/pda_data.hpp"
#include "rtnet/selector.hpp"

namespace rtnet {

enum class Variant {
  kRtnet,          // full selector
  kCoral,          // combined objective on full batches, selector off
  kSourceOnly,     // cross-entropy only, selector off
  kRtnetNoSelect,  // selector trained but its actions overridden to keep-all
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ExperimentConfig {
  PdaTaskSpec task;
  std::optional<std::filesystem::path> task_dir;  // load datasets instead of generating

  DaArchitecture arch;  // input_dim and num_classes follow the data
  DaHyperparams da;
  RlHyperparams rl;
  Eigen::Index generator_hidden = 32;
  double generator_lr = 1e-4;

  int episodes = 300;
  int pretrain_steps = 200;
  std::uint64_t seed = 0;
  Variant variant = Variant::kRtnet;
  std::filesystem::path out = "out";

  // Sweep description, used by `rtnet sweep` only.
  std::string sweep_axis;
  std::string sweep_values;
  int sweep_seeds = 1;

  /// Sets one key. Unknown keys and bad values raise ConfigError.
  void set(const std::string& key, const std::string& value);
  /// `key = value` lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  void validate() const;

  bool selector_acts() const { return variant == Variant::kRtnet; }
  bool selector_trains() const { return variant == Variant::kRtnet || variant == Variant::kRtnetNoSelect; }
  /// Loss weights after the variant is applied.
  DaHyperparams effective_da() const;
};

}  // namespace rtnet
