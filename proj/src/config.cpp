#include "rtnet/config.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rtnet {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kRtnet: return "rtnet";
    case Variant::kCoral: return "coral";
    case Variant::kSourceOnly: return "source_only";
    case Variant::kRtnetNoSelect: return "rtnet_noselect";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "rtnet") return Variant::kRtnet;
  if (s == "coral") return Variant::kCoral;
  if (s == "source_only") return Variant::kSourceOnly;
  if (s == "rtnet_noselect") return Variant::kRtnetNoSelect;
  throw ConfigError("unknown variant '" + s + "' (rtnet, coral, source_only, rtnet_noselect)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int<int>(key, trim(item)));
  return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "seed") seed = to_int<std::uint64_t>(key, v);
  else if (key == "variant") variant = variant_from_string(v);
  else if (key == "episodes") episodes = to_int<int>(key, v);
  else if (key == "batch_size") da.batch_size = to_int<int>(key, v);
  else if (key == "pretrain_steps") pretrain_steps = to_int<int>(key, v);
  else if (key == "out") out = v;
  else if (key == "task") task_dir = std::filesystem::path(v);
  else if (key == "feature_dim") arch.feature_dim = to_int<Eigen::Index>(key, v);
  else if (key == "hidden") arch.hidden = to_int<Eigen::Index>(key, v);
  else if (key == "generator_hidden") generator_hidden = to_int<Eigen::Index>(key, v);
  else if (key == "lambda_entropy" || key == "lambda1") da.lambda_entropy = to_double(key, v);
  else if (key == "lambda_coral" || key == "lambda2") da.lambda_coral = to_double(key, v);
  else if (key == "lr") da.lr = rl.policy_lr = rl.value_lr = generator_lr = to_double(key, v);
  else if (key == "coral_scaling") {
    if (v == "sample") da.coral_scaling = CovarianceScaling::kSample;
    else if (v == "scatter") da.coral_scaling = CovarianceScaling::kScatter;
    else throw ConfigError("coral_scaling: expected 'sample' or 'scatter', got '" + v + "'");
  }
  else if (key == "da_lr") da.lr = to_double(key, v);
  else if (key == "policy_lr") rl.policy_lr = to_double(key, v);
  else if (key == "value_lr") rl.value_lr = to_double(key, v);
  else if (key == "generator_lr") generator_lr = to_double(key, v);
  else if (key == "gamma") rl.gamma = to_double(key, v);
  else if (key == "selector_hidden") rl.hidden = to_int<Eigen::Index>(key, v);
  else if (key == "epsilon_decay_fraction") rl.epsilon_decay_fraction = to_double(key, v);
  else if (key == "task.classes") task.num_classes = to_int<int>(key, v);
  else if (key == "task.shared") task.shared = to_int_list(key, v);
  else if (key == "task.shared_count") {
    task.shared.resize(static_cast<std::size_t>(to_int<int>(key, v)));
    std::iota(task.shared.begin(), task.shared.end(), 0);
  }
  else if (key == "task.samples_per_class") task.samples_per_class = to_int<int>(key, v);
  else if (key == "task.input_dim") task.input_dim = to_int<int>(key, v);
  else if (key == "task.layout") task.layout = center_layout_from_string(v);
  else if (key == "task.separation") task.separation = to_double(key, v);
  else if (key == "task.noise") task.noise = to_double(key, v);
  else if (key == "task.rotation_deg") task.rotation_deg = to_double(key, v);
  else if (key == "task.translation") task.translation = to_double(key, v);
  else if (key == "task.scale") task.scale = to_double(key, v);
  else if (key == "task.seed") task.seed = to_int<std::uint64_t>(key, v);
  else if (key == "sweep.axis") sweep_axis = v;
  else if (key == "sweep.values") sweep_values = v;
  else if (key == "sweep.seeds") sweep_seeds = to_int<int>(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void ExperimentConfig::validate() const {
  if (!task_dir) task.validate();
  da.validate();
  rl.validate();
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  if (pretrain_steps < 0) throw ConfigError("pretrain_steps must be non-negative");
  if (arch.feature_dim < 1 || arch.hidden < 1 || generator_hidden < 1) throw ConfigError("layer sizes must be positive");
  if (!(generator_lr >= 0)) throw ConfigError("generator_lr must be non-negative");
}

DaHyperparams ExperimentConfig::effective_da() const {
  DaHyperparams hp = da;
  if (variant == Variant::kSourceOnly) hp.lambda_entropy = hp.lambda_coral = 0.0;
  return hp;
}

}  // namespace rtnet
