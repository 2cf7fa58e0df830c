#pragma once

#include <cmath>

#include "rtnet/selector.hpp"

namespace rtnet::testing {

/// Two fixed states: keeping A costs reconstruction error 0, keeping B costs 1,
/// so a batch that keeps only A earns reward 1 and one that keeps only B earns
/// e^-1. Each episode is `batches` batches of `batch` states, each A with
/// probability `share_a`. Small batches make the two-survivor fallback bite,
/// so dropping A costs reward; a slow critic keeps A's advantage positive.
struct BanditResult {
  double keep_a = 0;
  double keep_b = 0;
};

inline BanditResult run_bandit(std::uint64_t seed, int episodes = 500, int batches = 8, Eigen::Index batch = 8,
                               double policy_lr = 3e-3, double value_lr = 1e-4, double share_a = 0.5) {
  constexpr Eigen::Index kDim = 4;
  TensorXd a = TensorXd::Zero(1, kDim), b = TensorXd::Zero(1, kDim);
  a(0, 0) = 1;
  b(0, 0) = -1;

  RlHyperparams hp;
  hp.policy_lr = policy_lr;
  hp.value_lr = value_lr;
  hp.gamma = 0;
  Rng init = make_rng(seed, "bandit/init");
  Rng draws = make_rng(seed, "bandit/draws");
  Selector sel(kDim, hp.hidden, init);
  std::bernoulli_distribution coin(share_a);

  for (int e = 1; e <= episodes; ++e) {
    const double eps = epsilon_schedule(e, episodes, hp.epsilon_decay_fraction);
    EpisodeHistory history;
    for (int k = 1; k <= batches; ++k) {
      TensorXd states(batch, kDim);
      TensorXd errors(batch, 1);
      Labels unused = Labels::Zero(batch);
      for (Eigen::Index i = 0; i < batch; ++i) {
        const bool is_a = coin(draws);
        states.row(i) = is_a ? a : b;
        errors(i, 0) = is_a ? 0.0 : 1.0;
      }
      const ColumnXd values = sel.values(states);
      const Actions act = sample_actions(sel.policy_forward(states), eps, draws);
      const Selection s = select_batch(errors, unused, act);
      const double reward = std::exp(-s.inputs.col(0).mean());
      history.append({k, states, s.recorded_actions, reward, values});
    }
    replay_episode(sel, history, hp);
  }
  return {sel.policy_forward(a)(0, kKeepColumn), sel.policy_forward(b)(0, kKeepColumn)};
}

}  // namespace rtnet::testing
