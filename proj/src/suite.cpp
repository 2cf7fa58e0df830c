#include "rtnet/suite.hpp"

#include <atomic>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include "rtnet/trainer.hpp"

namespace rtnet {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<SuiteRun> make_sweep(const ExperimentConfig& base, const std::string& axis,
                                 const std::vector<std::string>& values, int seeds) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  if (seeds < 1) throw ConfigError("sweep: need at least one seed");
  std::string key;
  if (axis == "gamma") key = "gamma";
  else if (axis == "target_classes") key = "task.shared_count";
  else if (axis == "variant") key = "variant";
  else if (axis == "lambda_coral") key = "lambda_coral";
  else if (axis == "seed") key = "seed";
  else throw ConfigError("sweep: unknown axis '" + axis + "'");

  std::vector<SuiteRun> runs;
  for (const auto& v : values) {
    for (int k = 0; k < seeds; ++k) {
      ExperimentConfig c = base;
      c.seed = base.seed + static_cast<std::uint64_t>(k);
      if (!c.task_dir) c.task.seed = base.task.seed + static_cast<std::uint64_t>(k);
      c.set(key, v);
      if (axis == "seed" && !c.task_dir) c.task.seed = c.seed;
      c.out = base.out / (axis + "=" + v) / ("seed" + std::to_string(k));
      runs.push_back({axis, v, std::move(c)});
    }
  }
  return runs;
}

namespace {

SuiteRow execute(const SuiteRun& run) {
  SuiteRow row;
  row.axis = run.axis;
  row.value = run.value;
  row.variant = to_string(run.config.variant);
  row.seed = run.config.seed;
  try {
    TrainOptions opts;
    opts.keep_histories = false;
    const TrainResult r = run_experiment(run.config, opts);
    row.final_accuracy = r.final_accuracy;
    row.final_reward = r.episode_mean_reward.back();
    if (!run.config.task_dir) {
      const PdaTask task = materialize_task(run.config);
      const auto keep = retention_report(r.model.selector, r.model.da, task.source, UnlabeledSet(task.target_train));
      std::vector<bool> shared(keep.size(), false);
      for (int c : run.config.task.shared) shared[static_cast<std::size_t>(c)] = true;
      double s = 0, o = 0;
      int ns = 0, no = 0;
      for (std::size_t c = 0; c < keep.size(); ++c) (shared[c] ? (s += keep[c], ++ns) : (o += keep[c], ++no));
      row.retention_gap = (ns && no) ? s / ns - o / no : 0.0;
    }
  } catch (const std::exception& e) {
    row.status = e.what();
  }
  return row;
}

}  // namespace

std::vector<SuiteRow> run_suite(const std::vector<SuiteRun>& runs, int jobs) {
  std::vector<SuiteRow> rows(runs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) rows[i] = execute(runs[i]);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) rows[i] = execute(runs[i]);
      });
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SuiteRow>& rows) {
  out << "axis,value,variant,seed,final_accuracy,final_reward,retention_gap,status\n";
  char buf[128];
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g", r.final_accuracy, r.final_reward, r.retention_gap);
    out << r.axis << ',' << r.value << ',' << r.variant << ',' << r.seed << ',' << buf << ',' << status << '\n';
  }
}

}  // namespace rtnet
