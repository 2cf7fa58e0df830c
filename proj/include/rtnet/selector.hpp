#pragma once

#include <vector>

#include "rtnet/adam.hpp"
#include "rtnet/dense_network.hpp"
#include "rtnet/random.hpp"

namespace rtnet {

using Actions = Eigen::VectorXi;  // 1 = keep, 0 = drop

inline constexpr Eigen::Index kDropColumn = 0;
inline constexpr Eigen::Index kKeepColumn = 1;

struct RlHyperparams {
  double gamma = 0.8;
  double policy_lr = 1e-4;
  double value_lr = 1e-4;
  Eigen::Index hidden = 64;
  double epsilon_decay_fraction = 0.8;  // epsilon reaches 0 after this share of episodes

  void validate() const;
};

/// Mean predicted class distribution of a target batch.
ColumnXd target_label_distribution(const TensorXd& target_probs);

/// Rows [z_i | one_hot(y_i) | alpha], length feature_dim + 2 * num_classes.
TensorXd build_states(const TensorXd& features, const Labels& labels, const ColumnXd& alpha);

inline Eigen::Index state_dim(Eigen::Index feature_dim, Eigen::Index num_classes) {
  return feature_dim + 2 * num_classes;
}

/// Policy network (state -> softmax over {drop, keep}) and value network
/// (state -> scalar), each with one hidden ReLU layer.
struct Selector {
  Network policy;
  Network value;
  AdamState<double> policy_opt;
  AdamState<double> value_opt;

  Selector() = default;
  Selector(Eigen::Index state_dim, Eigen::Index hidden, Rng& rng);
  Selector(Network policy, Network value);

  /// n x 2, column kKeepColumn is the keep probability.
  TensorXd policy_forward(const TensorXd& states) const { return policy.evaluate(states); }
  ColumnXd values(const TensorXd& states) const { return value.evaluate(states).col(0); }
};

/// Per sample: with probability epsilon sample the action from the policy's
/// distribution, otherwise take the argmax (ties keep). Two uniforms are drawn
/// per sample regardless of branch, in sample order.
Actions sample_actions(const TensorXd& probs, double epsilon, Rng& rng);

struct Selection {
  TensorXd inputs;
  Labels labels;
  Actions recorded_actions;  // all-keep when the fallback fired
  Eigen::Index kept = 0;
  bool fallback = false;
};

/// Rows with action 1, in order. Fewer than two survivors means the full batch
/// is used and the actions are recorded as all-keep.
Selection select_batch(const TensorXd& x, const Labels& y, const Actions& actions);

struct StepRecord {
  int batch = 0;
  TensorXd states;
  Actions actions;
  double reward = 0;
  ColumnXd values;  // V(s_i) at the time the actions were taken
};

/// Append-only record of one episode's steps, batch ids 1..N.
class EpisodeHistory {
 public:
  void append(StepRecord record);
  const std::vector<StepRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::vector<double> rewards() const;

 private:
  std::vector<StepRecord> records_;
};

/// r'_b = sum_{j=0}^{N-b} gamma^j r_{b+j}, computed as r'_b = r_b + gamma r'_{b+1}.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

/// v_i = r'_b - V(s_i).
ColumnXd advantage(double batch_return, const ColumnXd& values);

/// Gradient of (1/n) sum_i v_i log max(pi(a_i | s_i), 1e-12) with respect to
/// the policy parameters. Ascend it.
NetGradients policy_gradient(const Network& policy, const TensorXd& states, const Actions& actions,
                             const ColumnXd& advantages);

/// (1/n) sum_i (target - V(s_i))^2 and its gradient.
double value_loss(const Network& value, const TensorXd& states, double target, NetGradients* grad = nullptr);

/// Ascent step on one record with advantages r'_b - V(s_i) from the stored values.
void update_policy_step(Selector& selector, const StepRecord& record, double batch_return, double lr);
void update_value_step(Selector& selector, const StepRecord& record, double batch_return, double lr);

/// One ascent step per record, in batch order, using the recorded value estimates.
void update_policy(Selector& selector, const EpisodeHistory& history, const std::vector<double>& returns, double lr);

/// One descent step per record on the squared error to the record's return.
void update_value(Selector& selector, const EpisodeHistory& history, const std::vector<double>& returns, double lr);

/// Post-episode replay: returns, then a policy and a value step per record.
std::vector<double> replay_episode(Selector& selector, const EpisodeHistory& history, const RlHyperparams& hp);

/// Linear decay max(0, 1 - (e - 1) / ceil(fraction * L)) for episode e in 1..L.
double epsilon_schedule(int episode, int total_episodes, double decay_fraction = 0.8);

}  // namespace rtnet
