#include "rtnet/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace rtnet {

void write_metrics_header(std::ostream& out) {
  out << "episode,batch,epsilon,kept,reward,return,loss_s,loss_t,loss_c,mean_value,accuracy\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,", r.episode, r.batch, r.epsilon,
                r.kept, r.reward, r.ret, r.loss_source, r.loss_entropy, r.loss_coral, r.mean_value);
  out << buf;
  if (r.accuracy) {
    std::snprintf(buf, sizeof buf, "%.6g", *r.accuracy);
    out << buf;
  }
  out << '\n';
}

double evaluate(const DaModel& model, const Dataset& test) {
  if (test.size() == 0) throw UsageError("evaluate: empty test set");
  const TensorXd probs = model.predict(test.inputs);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index arg = 0;
    probs.row(i).maxCoeff(&arg);
    if (arg == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<double> retention_report(const Selector& selector, const DaModel& model, const Dataset& source,
                                     const UnlabeledSet& target) {
  const ColumnXd alpha = target_label_distribution(model.predict(target.inputs));
  const TensorXd keep = selector.policy_forward(build_states(model.embed(source.inputs), source.labels, alpha));
  std::vector<double> sum(static_cast<std::size_t>(model.num_classes()), 0.0);
  std::vector<int> count(sum.size(), 0);
  for (Eigen::Index i = 0; i < keep.rows(); ++i) {
    sum[static_cast<std::size_t>(source.labels[i])] += keep(i, kKeepColumn);
    ++count[static_cast<std::size_t>(source.labels[i])];
  }
  for (std::size_t c = 0; c < sum.size(); ++c) sum[c] = count[c] ? sum[c] / count[c] : 0.0;
  return sum;
}

void write_retention_csv(std::ostream& out, const std::vector<double>& retention, const Dataset& source) {
  out << "class,samples,keep_probability\n";
  char buf[64];
  for (std::size_t c = 0; c < retention.size(); ++c) {
    const auto n = (source.labels.array() == static_cast<int>(c)).count();
    std::snprintf(buf, sizeof buf, "%zu,%ld,%.6g\n", c, static_cast<long>(n), retention[c]);
    out << buf;
  }
}

namespace {

// Re-raise with the failing location while keeping the error category.
[[noreturn]] void rethrow_at(int episode, int batch) {
  const std::string where = "episode " + std::to_string(episode) + (batch ? ", batch " + std::to_string(batch) : "") + ": ";
  try {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  } catch (const UsageError& e) {
    throw UsageError(where + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(where + e.what());
  }
}

}  // namespace

TrainResult train(const ExperimentConfig& config, const Dataset& source, const UnlabeledSet& target_train,
                  const Dataset& target_test, const TrainOptions& options) {
  config.validate();
  if (source.size() == 0 || target_train.size() == 0) throw ConfigError("train: empty training data");
  if (target_train.inputs.cols() != source.input_dim() || target_test.input_dim() != source.input_dim())
    throw ConfigError("train: source and target input dimensions differ");

  DaArchitecture arch = config.arch;
  arch.input_dim = source.input_dim();
  arch.num_classes = source.num_classes;
  const DaHyperparams da_hp = config.effective_da();
  const Eigen::Index batch_size = config.da.batch_size;

  TrainResult result;
  RtNetModel& model = result.model;
  const auto emit = [&](TrainStage s, int episode, int batch) {
    if (options.observer) options.observer(TrainEvent{s, episode, batch, &model});
  };

  // Initialization: F and C, then the selector and pre-trained generators.
  {
    Rng da_rng = make_rng(config.seed, "init/da");
    Rng gen_rng = make_rng(config.seed, "init/generators");
    Rng sel_rng = make_rng(config.seed, "init/selector");
    model.da = DaModel(arch, da_rng);
    model.generators = GeneratorPair(arch.feature_dim, config.generator_hidden, arch.input_dim, gen_rng);
    model.selector = Selector(state_dim(arch.feature_dim, arch.num_classes), config.rl.hidden, sel_rng);
    Rng pre_rng = make_rng(config.seed, "pretrain");
    pretrain_generators(model.generators, model.da.features, source.inputs, target_train.inputs,
                        config.pretrain_steps, batch_size, config.generator_lr, pre_rng);
  }

  Rng action_rng = make_rng(config.seed, "actions");
  using Clock = std::chrono::steady_clock;

  for (int episode = 1; episode <= config.episodes; ++episode) {
    const auto started = Clock::now();
    const double epsilon = epsilon_schedule(episode, config.episodes, config.rl.epsilon_decay_fraction);
    std::vector<BatchPair> pairs;
    try {
      pairs = make_batches(source, target_train, batch_size, config.seed, episode);
    } catch (...) {
      rethrow_at(episode, 0);
    }
    EpisodeHistory history;
    std::vector<MetricsRow> rows;

    for (const BatchPair& bp : pairs) {
      try {
        const TensorXd z_source = model.da.embed(bp.source_inputs);
        const ColumnXd alpha = target_label_distribution(model.da.predict(bp.target_inputs));
        TensorXd states = build_states(z_source, bp.source_labels, alpha);
        emit(TrainStage::kStates, episode, bp.id);

        const ColumnXd values = model.selector.values(states);
        Actions actions = Actions::Ones(states.rows());
        if (config.selector_acts()) actions = sample_actions(model.selector.policy_forward(states), epsilon, action_rng);
        Selection sel = select_batch(bp.source_inputs, bp.source_labels, actions);
        emit(TrainStage::kActions, episode, bp.id);

        const DaLosses losses = update_da_model(model.da, sel.inputs, sel.labels, bp.target_inputs, da_hp);
        emit(TrainStage::kDaUpdate, episode, bp.id);

        const double reward = compute_reward(model.generators.target, model.da.features, sel.inputs);
        emit(TrainStage::kReward, episode, bp.id);
        update_generators(model.generators, model.da.features, sel.inputs, bp.target_inputs, config.generator_lr);
        emit(TrainStage::kGeneratorUpdate, episode, bp.id);

        MetricsRow row;
        row.episode = episode;
        row.batch = bp.id;
        row.epsilon = epsilon;
        row.kept = static_cast<double>(sel.kept);
        row.reward = reward;
        row.loss_source = losses.source;
        row.loss_entropy = losses.entropy;
        row.loss_coral = losses.coral;
        row.mean_value = values.mean();
        rows.push_back(row);

        history.append(StepRecord{bp.id, std::move(states), std::move(sel.recorded_actions), reward, values});
        emit(TrainStage::kRecord, episode, bp.id);
      } catch (...) {
        rethrow_at(episode, bp.id);
      }
    }

    try {
      if (history.empty()) throw ConfigError("no complete batch pair in the episode");
      const std::vector<double> returns = discounted_returns(history.rewards(), config.rl.gamma);
      emit(TrainStage::kReturns, episode, 0);
      if (config.selector_trains()) {
        for (std::size_t b = 0; b < history.size(); ++b) {
          const StepRecord& rec = history.records()[b];
          const int id = rec.batch;
          update_policy_step(model.selector, rec, returns[b], config.rl.policy_lr);
          emit(TrainStage::kPolicyUpdate, episode, id);
          update_value_step(model.selector, rec, returns[b], config.rl.value_lr);
          emit(TrainStage::kValueUpdate, episode, id);
        }
      }
      const double accuracy = evaluate(model.da, target_test);
      emit(TrainStage::kEvaluate, episode, 0);

      MetricsRow summary;
      summary.episode = episode;
      summary.epsilon = epsilon;
      for (std::size_t b = 0; b < rows.size(); ++b) {
        rows[b].ret = returns[b];
        summary.kept += rows[b].kept;
        summary.reward += rows[b].reward;
        summary.ret += rows[b].ret;
        summary.loss_source += rows[b].loss_source;
        summary.loss_entropy += rows[b].loss_entropy;
        summary.loss_coral += rows[b].loss_coral;
        summary.mean_value += rows[b].mean_value;
      }
      const double n = static_cast<double>(rows.size());
      summary.kept /= n;
      summary.reward /= n;
      summary.ret /= n;
      summary.loss_source /= n;
      summary.loss_entropy /= n;
      summary.loss_coral /= n;
      summary.mean_value /= n;
      summary.accuracy = accuracy;

      result.metrics.insert(result.metrics.end(), rows.begin(), rows.end());
      result.metrics.push_back(summary);
      result.episode_accuracy.push_back(accuracy);
      result.episode_mean_reward.push_back(summary.reward);
      result.final_accuracy = accuracy;
      if (options.keep_histories) result.histories.push_back(std::move(history));
    } catch (...) {
      rethrow_at(episode, 0);
    }
    result.episode_seconds.push_back(std::chrono::duration<double>(Clock::now() - started).count());
  }
  return result;
}

PdaTask materialize_task(const ExperimentConfig& config) {
  if (config.task_dir) return load_task(*config.task_dir);
  return gen_pda_task(config.task);
}

TrainResult run_experiment(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  const PdaTask task = materialize_task(config);
  TrainResult result = train(config, task.source, UnlabeledSet(task.target_train), task.target_test, options);

  std::filesystem::create_directories(config.out);
  const auto open = [&](const char* name) {
    std::ofstream f(config.out / name);
    if (!f) throw ConfigError("cannot write " + (config.out / name).string());
    return f;
  };
  {
    auto f = open("metrics.csv");
    write_metrics_header(f);
    for (const auto& row : result.metrics) write_metrics_row(f, row);
  }
  {
    auto f = open("timing.csv");
    f << "episode,seconds\n";
    char buf[64];
    for (std::size_t e = 0; e < result.episode_seconds.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%zu,%.6g\n", e + 1, result.episode_seconds[e]);
      f << buf;
    }
  }
  {
    auto f = open("retention.csv");
    write_retention_csv(f, retention_report(result.model.selector, result.model.da, task.source,
                                            UnlabeledSet(task.target_train)),
                        task.source);
  }
  save_checkpoint(result.model, config.out / checkpoint_filename());
  return result;
}

}  // namespace rtnet
