#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rtnet/tensor.hpp"

namespace rtnet {

enum class Domain { kSource, kTarget };

/// kSimplex: centers pairwise `separation` apart along a seeded orthonormal frame.
/// kRing: centers on a circle in coordinates 0 and 1, neighbours `separation` apart.
enum class CenterLayout { kSimplex, kRing };

std::string to_string(CenterLayout l);
CenterLayout center_layout_from_string(const std::string& s);

std::string to_string(Domain d);

/// Gaussian-blob partial domain adaptation task. The target domain holds only
/// the `shared` classes and is pushed through an affine shift: rotation in the
/// first two coordinates, uniform feature scale, then translation by
/// `translation` along every axis.
struct PdaTaskSpec {
  int num_classes = 6;
  std::vector<int> shared{0, 1, 2};
  int samples_per_class = 100;
  int input_dim = 8;
  double separation = 3.0;  // minimum distance between class centers
  double noise = 0.3;       // within-class standard deviation
  double rotation_deg = 15.0;
  double translation = 0.5;
  double scale = 1.0;
  CenterLayout layout = CenterLayout::kRing;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Labeled samples from one domain.
struct Dataset {
  TensorXd inputs;
  Labels labels;
  Domain domain = Domain::kSource;
  int num_classes = 0;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index input_dim() const { return inputs.cols(); }
  bool operator==(const Dataset& o) const;
};

/// Target inputs with no access to labels; what the trainer consumes.
struct UnlabeledSet {
  TensorXd inputs;

  explicit UnlabeledSet(const Dataset& d) : inputs(d.inputs) {}
  explicit UnlabeledSet(TensorXd x) : inputs(std::move(x)) {}
  Eigen::Index size() const { return inputs.rows(); }
};

struct PdaTask {
  Dataset source;
  Dataset target_train;  // labels kept for evaluation only
  Dataset target_test;
  TensorXd centers;      // num_classes x input_dim, source-domain coordinates
};

PdaTask gen_pda_task(const PdaTaskSpec& spec);

struct BatchPair {
  int id = 0;  // 1-based within the episode
  TensorXd source_inputs;
  Labels source_labels;
  TensorXd target_inputs;
};

/// floor(min(n_s, n_t) / n) pairs from independent per-episode shuffles of
/// each domain; remainders are dropped.
std::vector<BatchPair> make_batches(const Dataset& source, const UnlabeledSet& target, Eigen::Index batch_size,
                                    std::uint64_t seed, int episode);

/// Text format:
///   rtnet-dataset 1
///   domain <source|target>
///   classes <C>
///   rows <m>
///   dim <d>
///   then m lines of "<label> <x_1> ... <x_d>" with 17 significant digits.
void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// <dir>/source.txt, <dir>/target_train.txt, <dir>/target_test.txt
void save_task(const PdaTask& task, const std::filesystem::path& dir);
PdaTask load_task(const std::filesystem::path& dir);

}  // namespace rtnet
