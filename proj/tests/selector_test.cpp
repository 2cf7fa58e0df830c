#include <gtest/gtest.h>

#include <cmath>

#include "bandit.hpp"
#include "rtnet/selector.hpp"
#include "test_support.hpp"

using namespace rtnet;
using rtnet::testing::random_tensor;

namespace {

Labels labels_of(std::initializer_list<int> v) {
  Labels l(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) l[i++] = x;
  return l;
}

Actions actions_of(std::initializer_list<int> v) { return labels_of(v); }

TensorXd probs_row(double drop, double keep, Eigen::Index rows = 1) {
  TensorXd p(rows, 2);
  p.col(0).setConstant(drop);
  p.col(1).setConstant(keep);
  return p;
}

Selector jittered_selector(Eigen::Index dim, Rng& rng) {
  Selector s(dim, 16, rng);
  rtnet::testing::jitter_biases(s.policy, rng);
  rtnet::testing::jitter_biases(s.value, rng);
  return s;
}

double policy_objective(const Network& policy, const TensorXd& states, const Actions& actions, const ColumnXd& adv) {
  const TensorXd p = policy.evaluate(states);
  double j = 0;
  for (Eigen::Index i = 0; i < states.rows(); ++i) j += adv[i] * std::log(std::max(p(i, actions[i]), 1e-12));
  return j / static_cast<double>(states.rows());
}

}  // namespace

TEST(LabelDistribution, MeanOfRows) {
  TensorXd p(2, 2);
  p << 0.6, 0.4, 0.2, 0.8;
  const ColumnXd a = target_label_distribution(p);
  EXPECT_NEAR(a[0], 0.4, 1e-12);
  EXPECT_NEAR(a[1], 0.6, 1e-12);
}

TEST(LabelDistribution, IdenticalRowsAndSimplex) {
  TensorXd p(3, 3);
  p.rowwise() = Eigen::RowVector3d(0.1, 0.7, 0.2);
  EXPECT_TRUE(target_label_distribution(p).isApprox(Eigen::Vector3d(0.1, 0.7, 0.2)));
  Rng rng(1);
  const TensorXd q = softmax_rows(random_tensor(9, 5, rng, 3.0));
  EXPECT_NEAR(target_label_distribution(q).sum(), 1.0, 1e-9);
  EXPECT_THROW(target_label_distribution(TensorXd(0, 3)), UsageError);
}

TEST(States, LayoutAndLength) {
  Rng rng(2);
  const TensorXd z = random_tensor(2, 4, rng);
  const ColumnXd alpha = Eigen::Vector3d(0.2, 0.3, 0.5);
  const TensorXd s = build_states(z, labels_of({2, 0}), alpha);
  ASSERT_EQ(s.cols(), 10);
  EXPECT_EQ(state_dim(4, 3), 10);
  EXPECT_TRUE(s.row(0).head(4) == z.row(0));
  EXPECT_TRUE(s.row(0).segment(4, 3) == Eigen::RowVector3d(0, 0, 1));
  EXPECT_TRUE(s.row(1).segment(4, 3) == Eigen::RowVector3d(1, 0, 0));
  EXPECT_TRUE(s.row(0).tail(3) == alpha.transpose());
  EXPECT_TRUE(s.row(1).tail(3) == alpha.transpose());
}

TEST(States, SameInputsSameState) {
  TensorXd z(2, 2);
  z << 1, 2, 1, 2;
  const TensorXd s = build_states(z, labels_of({1, 1}), Eigen::Vector2d(0.5, 0.5));
  EXPECT_TRUE(s.row(0) == s.row(1));
}

TEST(States, BadLabelIsUsageError) {
  const TensorXd z = TensorXd::Zero(2, 3);
  EXPECT_THROW(build_states(z, labels_of({0, 3}), Eigen::Vector3d::Constant(1.0 / 3)), UsageError);
  EXPECT_THROW(build_states(z, labels_of({0}), Eigen::Vector3d::Constant(1.0 / 3)), UsageError);
}

TEST(Policy, ZeroInitIsFairCoin) {
  Rng rng(3);
  Selector s(10, 64, rng);
  for (auto& l : s.policy.layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const TensorXd p = s.policy_forward(random_tensor(4, 10, rng));
  EXPECT_TRUE((p.array() == 0.5).all());
}

TEST(Policy, DistributionsAndDeterminism) {
  Rng rng(4);
  const Selector s(10, 64, rng);
  const TensorXd states = random_tensor(20, 10, rng, 2.0);
  const TensorXd p = s.policy_forward(states);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
  EXPECT_TRUE(p == s.policy_forward(states));
  EXPECT_EQ(s.values(states).size(), 20);
}

TEST(Policy, MismatchedNetworksAreConfigErrors) {
  Rng rng(5);
  Network p({{4, 8, Activation::kRelu}, {8, 2, Activation::kSoftmax}}, rng);
  Network v3({{4, 8, Activation::kRelu}, {8, 3, Activation::kLinear}}, rng);
  Network v5({{5, 8, Activation::kRelu}, {8, 1, Activation::kLinear}}, rng);
  EXPECT_THROW(Selector(p, v3), ConfigError);
  EXPECT_THROW(Selector(p, v5), ConfigError);
}

TEST(Actions, GreedyTakesArgmaxAndTiesKeep) {
  Rng rng(6);
  EXPECT_EQ(sample_actions(probs_row(0.3, 0.7, 50), 0.0, rng).sum(), 50);
  EXPECT_EQ(sample_actions(probs_row(0.5, 0.5, 50), 0.0, rng).sum(), 50);
  EXPECT_EQ(sample_actions(probs_row(0.7, 0.3, 50), 0.0, rng).sum(), 0);
}

TEST(Actions, FullExplorationFollowsPolicy) {
  Rng rng(7);
  const Actions a = sample_actions(probs_row(0.3, 0.7, 10000), 1.0, rng);
  EXPECT_NEAR(a.cast<double>().mean(), 0.7, 0.03);
}

TEST(Actions, MixedEpsilonRate) {
  // greedy drops, exploration keeps 40%: rate eps * 0.4
  Rng rng(8);
  const Actions a = sample_actions(probs_row(0.6, 0.4, 20000), 0.5, rng);
  EXPECT_NEAR(a.cast<double>().mean(), 0.2, 0.02);
}

TEST(Actions, DrawsTwoUniformsPerSample) {
  Rng a(9), b(9);
  sample_actions(probs_row(0.3, 0.7, 5), 0.0, a);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) u(b);
  EXPECT_EQ(a(), b());
}

TEST(Actions, BadArgumentsAreUsageErrors) {
  Rng rng(10);
  EXPECT_THROW(sample_actions(probs_row(0.5, 0.5), 1.5, rng), UsageError);
  EXPECT_THROW(sample_actions(TensorXd::Constant(1, 3, 1.0 / 3), 0.5, rng), UsageError);
}

TEST(Select, KeepsRowsInOrder) {
  TensorXd x(3, 2);
  x << 1, 1, 2, 2, 3, 3;
  const Selection s = select_batch(x, labels_of({0, 1, 2}), actions_of({1, 0, 1}));
  EXPECT_EQ(s.kept, 2);
  EXPECT_FALSE(s.fallback);
  ASSERT_EQ(s.inputs.rows(), 2);
  EXPECT_EQ(s.inputs(0, 0), 1);
  EXPECT_EQ(s.inputs(1, 0), 3);
  EXPECT_EQ(s.labels[1], 2);
  EXPECT_TRUE(s.recorded_actions == actions_of({1, 0, 1}));
}

TEST(Select, AllKeepIsIdentity) {
  Rng rng(11);
  const TensorXd x = random_tensor(4, 3, rng);
  const Labels y = labels_of({0, 1, 0, 1});
  const Selection s = select_batch(x, y, Actions::Ones(4));
  EXPECT_TRUE(s.inputs == x);
  EXPECT_TRUE(s.labels == y);
  EXPECT_EQ(s.kept, 4);
}

TEST(Select, FewerThanTwoTriggersFallback) {
  Rng rng(12);
  const TensorXd x = random_tensor(4, 3, rng);
  const Labels y = labels_of({0, 1, 0, 1});
  for (const Actions& a : {actions_of({0, 0, 0, 0}), actions_of({0, 1, 0, 0})}) {
    const Selection s = select_batch(x, y, a);
    EXPECT_TRUE(s.fallback);
    EXPECT_TRUE(s.inputs == x);
    EXPECT_EQ(s.kept, 4);
    EXPECT_TRUE(s.recorded_actions == Actions::Ones(4));
  }
  EXPECT_THROW(select_batch(x, y, Actions::Ones(3)), UsageError);
}

TEST(Returns, HandExamples) {
  const auto r = discounted_returns({1.0, 0.5, 0.25}, 0.5);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 1.3125, 1e-12);
  EXPECT_NEAR(r[1], 0.625, 1e-12);
  EXPECT_NEAR(r[2], 0.25, 1e-12);
  EXPECT_EQ(discounted_returns({1, 1, 1, 1}, 1.0), (std::vector<double>{4, 3, 2, 1}));
  const std::vector<double> raw{0.3, 0.9, 0.1};
  EXPECT_EQ(discounted_returns(raw, 0.0), raw);
}

TEST(Returns, RecursionHolds) {
  Rng rng(13);
  std::uniform_int_distribution<int> len(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> rewards(static_cast<std::size_t>(len(rng)));
    for (auto& x : rewards) x = u(rng);
    const double gamma = u(rng);
    const auto r = discounted_returns(rewards, gamma);
    EXPECT_EQ(r.back(), rewards.back());
    for (std::size_t b = 0; b + 1 < r.size(); ++b) EXPECT_NEAR(r[b], rewards[b] + gamma * r[b + 1], 1e-12);
  }
}

TEST(Returns, BadInputsAreUsageErrors) {
  EXPECT_THROW(discounted_returns({}, 0.5), UsageError);
  EXPECT_THROW(discounted_returns({1.0}, 1.5), UsageError);
}

TEST(Advantage, Arithmetic) {
  const ColumnXd v = advantage(1.3125, Eigen::Vector3d(1.0, 1.3125, 2.0));
  EXPECT_NEAR(v[0], 0.3125, 1e-12);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_LT(v[2], 0.0);
}

TEST(History, EnforcesOrderAndShapes) {
  EpisodeHistory h;
  const TensorXd s = TensorXd::Zero(3, 4);
  h.append({1, s, Actions::Ones(3), 0.5, ColumnXd::Zero(3)});
  h.append({2, s, Actions::Ones(3), 0.25, ColumnXd::Zero(3)});
  EXPECT_EQ(h.rewards(), (std::vector<double>{0.5, 0.25}));
  EXPECT_THROW(h.append({4, s, Actions::Ones(3), 0.1, ColumnXd::Zero(3)}), UsageError);
  EXPECT_THROW(h.append({3, s, Actions::Ones(2), 0.1, ColumnXd::Zero(3)}), UsageError);
  EXPECT_EQ(h.size(), 2u);
}

TEST(PolicyGradient, MatchesFiniteDifferences) {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    Selector sel = jittered_selector(6, rng);
    TensorXd states = random_tensor(5, 6, rng);
    while (rtnet::testing::min_relu_margin(sel.policy, states) < 1e-3) states = random_tensor(5, 6, rng);
    Actions act(5);
    for (Eigen::Index i = 0; i < 5; ++i) act[i] = static_cast<int>(rng() % 2);
    const ColumnXd adv = random_tensor(5, 1, rng);
    const NetGradients g = policy_gradient(sel.policy, states, act, adv);
    const auto j = [&] { return policy_objective(sel.policy, states, act, adv); };
    EXPECT_LT(rtnet::testing::check_network_gradient(sel.policy, j, g), 1e-4);
  }
}

TEST(PolicyGradient, PositiveScalingKeepsDirection) {
  Rng rng(15);
  const Selector sel = jittered_selector(6, rng);
  const TensorXd states = random_tensor(8, 6, rng);
  Actions act(8);
  for (Eigen::Index i = 0; i < 8; ++i) act[i] = static_cast<int>(i % 2);
  const ColumnXd adv = random_tensor(8, 1, rng);
  const ColumnXd g1 = policy_gradient(sel.policy, states, act, adv).flatten();
  const ColumnXd g2 = policy_gradient(sel.policy, states, act, 7.5 * adv).flatten();
  EXPECT_NEAR(g1.dot(g2) / (g1.norm() * g2.norm()), 1.0, 1e-9);
  EXPECT_NEAR(g2.norm() / g1.norm(), 7.5, 1e-9);
}

TEST(PolicyUpdate, ZeroAdvantageLeavesPolicy) {
  Rng rng(16);
  Selector sel = jittered_selector(6, rng);
  EpisodeHistory h;
  h.append({1, random_tensor(4, 6, rng), Actions::Ones(4), 0.0, ColumnXd::Constant(4, 0.7)});
  const ColumnXd before = sel.policy.parameters();
  update_policy(sel, h, {0.7}, 1e-2);  // return equals every stored value
  EXPECT_TRUE(sel.policy.parameters() == before);
}

TEST(PolicyUpdate, ReinforceRaisesKeepProbability) {
  Rng rng(17);
  Selector sel = jittered_selector(6, rng);
  const TensorXd state = random_tensor(1, 6, rng);
  double last = sel.policy_forward(state)(0, kKeepColumn);
  for (int step = 0; step < 100; ++step) {
    EpisodeHistory h;
    h.append({1, state, Actions::Ones(1), 1.0, ColumnXd::Zero(1)});
    update_policy(sel, h, {1.0}, 1e-3);
    const double now = sel.policy_forward(state)(0, kKeepColumn);
    EXPECT_GT(now, last);
    last = now;
  }
}

TEST(PolicyUpdate, RequiresOneReturnPerRecord) {
  Rng rng(18);
  Selector sel = jittered_selector(6, rng);
  EpisodeHistory h;
  h.append({1, TensorXd::Zero(2, 6), Actions::Ones(2), 1.0, ColumnXd::Zero(2)});
  EXPECT_THROW(update_policy(sel, h, {1.0, 2.0}, 1e-3), UsageError);
  EXPECT_THROW(update_value(sel, h, {}, 1e-3), UsageError);
}

TEST(ValueLoss, MatchesFiniteDifferences) {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    Selector sel = jittered_selector(6, rng);
    TensorXd states = random_tensor(5, 6, rng);
    while (rtnet::testing::min_relu_margin(sel.value, states) < 1e-3) states = random_tensor(5, 6, rng);
    NetGradients g;
    value_loss(sel.value, states, 0.8, &g);
    const auto f = [&] { return value_loss(sel.value, states, 0.8); };
    EXPECT_LT(rtnet::testing::check_network_gradient(sel.value, f, g), 1e-4);
  }
}

TEST(ValueUpdate, ExactTargetLeavesValue) {
  Rng rng(20);
  Selector sel(6, 16, rng);
  auto& out = sel.value.layers().back();
  out.weight.setZero();
  out.bias.setConstant(0.4);
  const TensorXd states = random_tensor(4, 6, rng);
  EpisodeHistory h;
  h.append({1, states, Actions::Ones(4), 0.4, sel.values(states)});
  const ColumnXd before = sel.value.parameters();
  update_value(sel, h, {0.4}, 1e-2);
  EXPECT_TRUE(sel.value.parameters() == before);
}

TEST(ValueUpdate, RegressionDescends) {
  Rng rng(21);
  Selector sel = jittered_selector(6, rng);
  const TensorXd states = random_tensor(8, 6, rng);
  const double start = value_loss(sel.value, states, 1.5);
  for (int step = 0; step < 200; ++step) {
    EpisodeHistory h;
    h.append({1, states, Actions::Ones(8), 1.5, sel.values(states)});
    update_value(sel, h, {1.5}, 1e-2);
  }
  EXPECT_LT(value_loss(sel.value, states, 1.5), 0.1 * start);
}

TEST(ValueUpdate, ZeroRateLeavesValue) {
  Rng rng(22);
  Selector sel = jittered_selector(6, rng);
  const TensorXd states = random_tensor(3, 6, rng);
  EpisodeHistory h;
  h.append({1, states, Actions::Ones(3), 1.0, sel.values(states)});
  const ColumnXd before = sel.value.parameters();
  update_value(sel, h, {1.0}, 0.0);
  EXPECT_TRUE(sel.value.parameters() == before);
}

TEST(Replay, ReturnsAndUpdatesEveryRecord) {
  Rng rng(23);
  Selector sel = jittered_selector(6, rng);
  EpisodeHistory h;
  for (int b = 1; b <= 3; ++b) {
    const TensorXd s = random_tensor(4, 6, rng);
    h.append({b, s, Actions::Ones(4), 0.5 / b, sel.values(s)});
  }
  RlHyperparams hp;
  hp.gamma = 0.5;
  hp.policy_lr = 1e-3;
  hp.value_lr = 1e-3;
  const auto r = replay_episode(sel, h, hp);
  EXPECT_EQ(r, discounted_returns(h.rewards(), 0.5));
  EXPECT_EQ(sel.policy_opt.step, 3);
  EXPECT_EQ(sel.value_opt.step, 3);
}

TEST(Epsilon, LinearDecay) {
  EXPECT_EQ(epsilon_schedule(1, 10), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_schedule(5, 10), 0.5);
  EXPECT_EQ(epsilon_schedule(9, 10), 0.0);
  EXPECT_EQ(epsilon_schedule(10, 10), 0.0);
  EXPECT_EQ(epsilon_schedule(241, 300), 0.0);
  EXPECT_GT(epsilon_schedule(240, 300), 0.0);
  EXPECT_THROW(epsilon_schedule(0, 10), UsageError);
  EXPECT_THROW(epsilon_schedule(11, 10), UsageError);
}

TEST(Epsilon, GreedyLimitFollowsMajority) {
  Rng rng(24);
  TensorXd p(2, 2);
  p << 0.45, 0.55, 0.55, 0.45;
  const TensorXd many = p.replicate(500, 1);
  const Actions a = sample_actions(many, epsilon_schedule(300, 300), rng);
  for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], i % 2 == 0 ? 1 : 0);
}

TEST(Bandit, LowRewardStateIsDropped) {
  const auto r = rtnet::testing::run_bandit(0);
  EXPECT_LT(r.keep_b, 0.5);
  EXPECT_GT(r.keep_a, r.keep_b + 0.3);
}

TEST(RlHyperparams, Validation) {
  RlHyperparams hp;
  EXPECT_NO_THROW(hp.validate());
  hp.gamma = 1.2;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp = {};
  hp.epsilon_decay_fraction = 0;
  EXPECT_THROW(hp.validate(), ConfigError);
}
