#include "rtnet/selector.hpp"

#include <algorithm>
#include <cmath>

#include "rtnet/losses.hpp"

namespace rtnet {

void RlHyperparams::validate() const {
  if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(policy_lr >= 0) || !(value_lr >= 0)) throw ConfigError("selector learning rates must be non-negative");
  if (hidden < 1) throw ConfigError("selector hidden width must be positive");
  if (!(epsilon_decay_fraction > 0 && epsilon_decay_fraction <= 1))
    throw ConfigError("epsilon decay fraction must lie in (0, 1]");
}

ColumnXd target_label_distribution(const TensorXd& target_probs) {
  if (target_probs.rows() == 0) throw UsageError("target_label_distribution: empty batch");
  return target_probs.colwise().mean().transpose();
}

TensorXd build_states(const TensorXd& features, const Labels& labels, const ColumnXd& alpha) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const Eigen::Index classes = alpha.size();
  if (labels.size() != n) throw UsageError("build_states: label count does not match features");
  TensorXd states = TensorXd::Zero(n, d + 2 * classes);
  states.leftCols(d) = features;
  states.rightCols(classes).rowwise() = alpha.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw UsageError("build_states: label " + std::to_string(labels[i]) + " out of range");
    states(i, d + labels[i]) = 1.0;
  }
  return states;
}

Selector::Selector(Eigen::Index state_dim, Eigen::Index hidden, Rng& rng)
    : Selector(Network({{state_dim, hidden, Activation::kRelu}, {hidden, 2, Activation::kSoftmax}}, rng),
               Network({{state_dim, hidden, Activation::kRelu}, {hidden, 1, Activation::kLinear}}, rng)) {}

Selector::Selector(Network p, Network v)
    : policy(std::move(p)), value(std::move(v)), policy_opt(policy), value_opt(value) {
  if (policy.output_dim() != 2 || policy.layers().back().activation != Activation::kSoftmax)
    throw ConfigError("Selector: policy must end in a 2-way softmax");
  if (value.output_dim() != 1) throw ConfigError("Selector: value network must output one scalar");
  if (policy.input_dim() != value.input_dim()) throw ConfigError("Selector: policy and value disagree on state size");
}

Actions sample_actions(const TensorXd& probs, double epsilon, Rng& rng) {
  if (!(epsilon >= 0 && epsilon <= 1)) throw UsageError("sample_actions: epsilon must lie in [0, 1]");
  if (probs.cols() != 2) throw UsageError("sample_actions: expected probability pairs");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Actions actions(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double explore = unit(rng);
    const double draw = unit(rng);
    const double keep = probs(i, kKeepColumn);
    if (explore < epsilon)
      actions[i] = draw < keep ? 1 : 0;
    else
      actions[i] = keep >= probs(i, kDropColumn) ? 1 : 0;
  }
  return actions;
}

Selection select_batch(const TensorXd& x, const Labels& y, const Actions& actions) {
  if (x.rows() != y.size() || x.rows() != actions.size()) throw UsageError("select_batch: inconsistent lengths");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < actions.size(); ++i)
    if (actions[i] == 1) kept.push_back(i);

  Selection s;
  if (kept.size() < 2) {
    s.inputs = x;
    s.labels = y;
    s.recorded_actions = Actions::Ones(actions.size());
    s.kept = x.rows();
    s.fallback = true;
    return s;
  }
  s.inputs = gather_rows(x, kept);
  s.labels.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) s.labels[static_cast<Eigen::Index>(k)] = y[kept[k]];
  s.recorded_actions = actions;
  s.kept = static_cast<Eigen::Index>(kept.size());
  return s;
}

void EpisodeHistory::append(StepRecord record) {
  const int expected = static_cast<int>(records_.size()) + 1;
  if (record.batch != expected)
    throw UsageError("EpisodeHistory: expected batch id " + std::to_string(expected) + ", got " +
                     std::to_string(record.batch));
  const Eigen::Index n = record.states.rows();
  if (record.actions.size() != n || record.values.size() != n)
    throw UsageError("EpisodeHistory: record fields disagree on batch size");
  records_.push_back(std::move(record));
}

std::vector<double> EpisodeHistory::rewards() const {
  std::vector<double> r;
  r.reserve(records_.size());
  for (const auto& rec : records_) r.push_back(rec.reward);
  return r;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty()) throw UsageError("discounted_returns: no rewards");
  if (!(gamma >= 0 && gamma <= 1)) throw UsageError("discounted_returns: gamma must lie in [0, 1]");
  std::vector<double> returns(rewards.size());
  double next = 0.0;
  for (std::size_t b = rewards.size(); b-- > 0;) {
    returns[b] = b + 1 == rewards.size() ? rewards[b] : rewards[b] + gamma * next;
    next = returns[b];
  }
  return returns;
}

ColumnXd advantage(double batch_return, const ColumnXd& values) {
  return (batch_return - values.array()).matrix();
}

NetGradients policy_gradient(const Network& policy, const TensorXd& states, const Actions& actions,
                             const ColumnXd& advantages) {
  const Eigen::Index n = states.rows();
  if (actions.size() != n || advantages.size() != n) throw UsageError("policy_gradient: inconsistent lengths");
  if (n == 0) throw UsageError("policy_gradient: empty batch");
  const NetTrace trace = policy.forward(states);
  const TensorXd& probs = trace.output();
  TensorXd upstream = TensorXd::Zero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = actions[i] == 1 ? kKeepColumn : kDropColumn;
    const double p = probs(i, a);
    if (p > kProbabilityFloor) upstream(i, a) = advantages[i] / (static_cast<double>(n) * p);
  }
  NetGradients g = policy.backward(trace, upstream);
  g.input.resize(0, 0);
  return g;
}

double value_loss(const Network& value, const TensorXd& states, double target, NetGradients* grad) {
  const NetTrace trace = value.forward(states);
  const ColumnXd residual = (target - trace.output().col(0).array()).matrix();
  const double n = static_cast<double>(states.rows());
  if (grad) {
    TensorXd upstream = (-2.0 / n) * residual;
    *grad = value.backward(trace, upstream);
  }
  return residual.squaredNorm() / n;
}

namespace {

void check_returns(const EpisodeHistory& history, const std::vector<double>& returns) {
  if (returns.size() != history.size()) throw UsageError("selector update: one return per record required");
}

}  // namespace

void update_policy_step(Selector& s, const StepRecord& rec, double batch_return, double lr) {
  NetGradients g = policy_gradient(s.policy, rec.states, rec.actions, advantage(batch_return, rec.values));
  g *= -1.0;  // ascent on J through a descent optimizer
  adam_step(s.policy, g, s.policy_opt, lr);
}

void update_value_step(Selector& s, const StepRecord& rec, double batch_return, double lr) {
  NetGradients g;
  value_loss(s.value, rec.states, batch_return, &g);
  adam_step(s.value, g, s.value_opt, lr);
}

void update_policy(Selector& selector, const EpisodeHistory& history, const std::vector<double>& returns, double lr) {
  check_returns(history, returns);
  for (std::size_t b = 0; b < history.size(); ++b) update_policy_step(selector, history.records()[b], returns[b], lr);
}

void update_value(Selector& selector, const EpisodeHistory& history, const std::vector<double>& returns, double lr) {
  check_returns(history, returns);
  for (std::size_t b = 0; b < history.size(); ++b) update_value_step(selector, history.records()[b], returns[b], lr);
}

std::vector<double> replay_episode(Selector& selector, const EpisodeHistory& history, const RlHyperparams& hp) {
  const std::vector<double> returns = discounted_returns(history.rewards(), hp.gamma);
  for (std::size_t b = 0; b < history.size(); ++b) {
    update_policy_step(selector, history.records()[b], returns[b], hp.policy_lr);
    update_value_step(selector, history.records()[b], returns[b], hp.value_lr);
  }
  return returns;
}

double epsilon_schedule(int episode, int total_episodes, double decay_fraction) {
  if (total_episodes < 1 || episode < 1 || episode > total_episodes)
    throw UsageError("epsilon_schedule: episode out of range");
  const double horizon = std::ceil(decay_fraction * static_cast<double>(total_episodes));
  return std::max(0.0, 1.0 - static_cast<double>(episode - 1) / horizon);
}

}  // namespace rtnet
