// rtnet: generate synthetic tasks, train, evaluate, report retention, sweep.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "rtnet/suite.hpp"
#include "rtnet/trainer.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::optional<int> episodes;
  std::optional<double> gamma;
  std::string out;
  std::string task;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--variant", f.variant, "rtnet | coral | source_only | rtnet_noselect");
  cmd->add_option("--episodes", f.episodes, "episode count");
  cmd->add_option("--gamma", f.gamma, "reward discount factor");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--task", f.task, "task directory with source.txt, target_train.txt, target_test.txt");
  cmd->add_option("--set", f.overrides, "extra config override, key=value (repeatable)");
}

rtnet::ExperimentConfig build_config(const CommonFlags& f) {
  rtnet::ExperimentConfig c;
  if (!f.config.empty()) c.load_file(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw rtnet::ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) c.seed = *f.seed;
  if (!f.variant.empty()) c.variant = rtnet::variant_from_string(f.variant);
  if (f.episodes) c.episodes = *f.episodes;
  if (f.gamma) c.rl.gamma = *f.gamma;
  if (!f.out.empty()) c.out = f.out;
  if (!f.task.empty()) c.task_dir = std::filesystem::path(f.task);
  c.validate();
  return c;
}

std::filesystem::path checkpoint_path(const rtnet::ExperimentConfig& c, const std::string& explicit_path) {
  return explicit_path.empty() ? c.out / rtnet::checkpoint_filename() : std::filesystem::path(explicit_path);
}

int run(int argc, char** argv) {
  CLI::App app{"Reinforced sample selection for partial domain adaptation"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f, report_f, sweep_f;
  std::string eval_ckpt, report_ckpt, sweep_axis, sweep_values;
  std::optional<int> sweep_seeds;
  int sweep_jobs = 1;

  auto* gen = app.add_subcommand("gen-task", "write a synthetic task to --out (or --task)");
  add_common(gen, gen_f);
  auto* tr = app.add_subcommand("train", "train one variant and write metrics, retention and checkpoint");
  add_common(tr, train_f);
  auto* ev = app.add_subcommand("eval", "target-test accuracy of a checkpoint");
  add_common(ev, eval_f);
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint file (default <out>/checkpoint.v1)");
  auto* rep = app.add_subcommand("report", "per-class retention probabilities of a checkpoint");
  add_common(rep, report_f);
  rep->add_option("--checkpoint", report_ckpt, "checkpoint file (default <out>/checkpoint.v1)");
  auto* sw = app.add_subcommand("sweep", "train a grid along one axis and write sweep.csv");
  add_common(sw, sweep_f);
  sw->add_option("--axis", sweep_axis, "gamma | target_classes | variant | lambda_coral | seed");
  sw->add_option("--values", sweep_values, "comma separated axis values");
  sw->add_option("--seeds", sweep_seeds, "seeds per value");
  sw->add_option("--jobs", sweep_jobs, "parallel runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*gen) {
    rtnet::ExperimentConfig c = build_config(gen_f);
    const std::filesystem::path dir = gen_f.task.empty() ? c.out : std::filesystem::path(gen_f.task);
    rtnet::ExperimentConfig g = c;
    g.task_dir.reset();
    rtnet::save_task(rtnet::gen_pda_task(g.task), dir);
    std::cout << "wrote task to " << dir.string() << "\n";
  } else if (*tr) {
    const rtnet::ExperimentConfig c = build_config(train_f);
    const rtnet::TrainResult r = rtnet::run_experiment(c);
    std::printf("variant=%s episodes=%d final_accuracy=%.6g\n", rtnet::to_string(c.variant).c_str(), c.episodes,
                r.final_accuracy);
  } else if (*ev) {
    const rtnet::ExperimentConfig c = build_config(eval_f);
    const rtnet::RtNetModel m = rtnet::load_checkpoint(checkpoint_path(c, eval_ckpt));
    const rtnet::PdaTask task = rtnet::materialize_task(c);
    std::printf("accuracy=%.6g\n", rtnet::evaluate(m.da, task.target_test));
  } else if (*rep) {
    const rtnet::ExperimentConfig c = build_config(report_f);
    const rtnet::RtNetModel m = rtnet::load_checkpoint(checkpoint_path(c, report_ckpt));
    const rtnet::PdaTask task = rtnet::materialize_task(c);
    const auto keep = rtnet::retention_report(m.selector, m.da, task.source, rtnet::UnlabeledSet(task.target_train));
    std::filesystem::create_directories(c.out);
    std::ofstream f(c.out / "retention.csv");
    rtnet::write_retention_csv(f, keep, task.source);
    rtnet::write_retention_csv(std::cout, keep, task.source);
  } else if (*sw) {
    rtnet::ExperimentConfig c = build_config(sweep_f);
    const std::string axis = sweep_axis.empty() ? c.sweep_axis : sweep_axis;
    const std::string values = sweep_values.empty() ? c.sweep_values : sweep_values;
    if (axis.empty()) throw rtnet::ConfigError("sweep needs --axis or sweep.axis");
    const auto runs = rtnet::make_sweep(c, axis, rtnet::split_list(values), sweep_seeds.value_or(c.sweep_seeds));
    const auto rows = rtnet::run_suite(runs, sweep_jobs);
    std::filesystem::create_directories(c.out);
    std::ofstream f(c.out / "sweep.csv");
    rtnet::write_sweep_csv(f, rows);
    rtnet::write_sweep_csv(std::cout, rows);
    for (const auto& r : rows)
      if (r.status != "ok") return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rtnet::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const rtnet::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
