#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rtnet/config.hpp"

namespace rtnet {

struct SuiteRun {
  std::string axis;
  std::string value;
  ExperimentConfig config;
};

struct SuiteRow {
  std::string axis;
  std::string value;
  std::string variant;
  std::uint64_t seed = 0;
  double final_accuracy = 0;
  double final_reward = 0;     // mean reward of the last episode
  double retention_gap = 0;    // mean keep prob, shared minus outlier classes (0 without outliers)
  std::string status = "ok";   // or the error message
};

/// One run per value of `axis` per seed. Axes: gamma, target_classes,
/// variant, lambda_coral, seed. Each run writes into
/// <base.out>/<axis>=<value>/seed<k>.
std::vector<SuiteRun> make_sweep(const ExperimentConfig& base, const std::string& axis,
                                 const std::vector<std::string>& values, int seeds);

/// Runs every entry; failures are recorded in the row and the suite goes on.
/// `jobs` > 1 runs entries on that many threads.
std::vector<SuiteRow> run_suite(const std::vector<SuiteRun>& runs, int jobs = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SuiteRow>& rows);

std::vector<std::string> split_list(const std::string& csv);

}  // namespace rtnet
