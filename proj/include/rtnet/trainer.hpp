#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rtnet/checkpoint.hpp"
#include "rtnet/config.hpp"
#include "rtnet/pda_data.hpp"

namespace rtnet {

/// One line of metrics.csv. Step rows have batch >= 1, the per-episode summary
/// row has batch 0 and carries episode means plus the test accuracy.
struct MetricsRow {
  int episode = 0;
  int batch = 0;
  double epsilon = 0;
  double kept = 0;          // n' (mean over batches on summary rows)
  double reward = 0;        // r_b
  double ret = 0;           // r'_b, filled after the episode
  double loss_source = 0;   // L_s
  double loss_entropy = 0;  // L_t
  double loss_coral = 0;    // L_c
  double mean_value = 0;    // mean V(S_b)
  std::optional<double> accuracy;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

/// Observable points in a training step, in the order they happen.
enum class TrainStage {
  kStates,           // S_b built from F and C
  kActions,          // A_b chosen and the batch selected
  kDaUpdate,         // F, C stepped on the selected batch
  kReward,           // r_b read from G_t
  kGeneratorUpdate,  // G_s, G_t stepped
  kRecord,           // step appended to the episode history
  kReturns,          // r'_b computed after the data loop
  kPolicyUpdate,
  kValueUpdate,
  kEvaluate,
};

struct TrainEvent {
  TrainStage stage;
  int episode = 0;
  int batch = 0;  // 0 outside a step
  const RtNetModel* model = nullptr;
};

struct TrainOptions {
  std::function<void(const TrainEvent&)> observer;
  bool keep_histories = true;
};

struct TrainResult {
  RtNetModel model;
  std::vector<MetricsRow> metrics;
  std::vector<EpisodeHistory> histories;
  std::vector<double> episode_accuracy;
  std::vector<double> episode_mean_reward;
  std::vector<double> episode_seconds;
  double final_accuracy = 0;
};

/// The alternating training loop. Target labels are not visible to it;
/// `target_test` is used for per-episode evaluation only.
TrainResult train(const ExperimentConfig& config, const Dataset& source, const UnlabeledSet& target_train,
                  const Dataset& target_test, const TrainOptions& options = {});

/// Fraction of argmax predictions over all source classes that equal the label.
double evaluate(const DaModel& model, const Dataset& test);

/// Mean keep probability per source class, with alpha taken from one pass of
/// the model over all of `target`.
std::vector<double> retention_report(const Selector& selector, const DaModel& model, const Dataset& source,
                                     const UnlabeledSet& target);

void write_retention_csv(std::ostream& out, const std::vector<double>& retention, const Dataset& source);

/// Data for a config: the task directory if set, else a generated task.
PdaTask materialize_task(const ExperimentConfig& config);

/// Full run with files: metrics.csv, timing.csv, retention.csv and the
/// checkpoint in config.out.
TrainResult run_experiment(const ExperimentConfig& config, const TrainOptions& options = {});

}  // namespace rtnet
