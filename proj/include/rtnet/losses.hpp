#pragma once

#include <algorithm>
#include <cmath>

#include "rtnet/tensor.hpp"

namespace rtnet {

inline constexpr double kProbabilityFloor = 1e-12;

template <typename Scalar>
struct LossResult {
  Scalar value = 0;
  Tensor<Scalar> grad;  // dL/dprobs
};

/// Mean over rows of -log max(p_{i, y_i}, floor).
template <typename Scalar>
LossResult<Scalar> cross_entropy(const Tensor<Scalar>& probs, const Labels& labels) {
  if (labels.size() != probs.rows()) throw UsageError("cross_entropy: label count does not match batch");
  if (probs.rows() == 0) throw UsageError("cross_entropy: empty batch");
  LossResult<Scalar> r;
  r.grad = Tensor<Scalar>::Zero(probs.rows(), probs.cols());
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= probs.cols()) throw UsageError("cross_entropy: label " + std::to_string(y) + " out of range");
    const Scalar p = probs(i, y);
    const Scalar floor = Scalar(kProbabilityFloor);
    r.value -= std::log(std::max(p, floor)) * inv_n;
    if (p > floor) r.grad(i, y) = -inv_n / p;
  }
  return r;
}

/// Mean over rows of the Shannon entropy -sum_c p_c log p_c (0 log 0 = 0).
template <typename Scalar>
LossResult<Scalar> mean_entropy(const Tensor<Scalar>& probs) {
  if (probs.rows() == 0) throw UsageError("mean_entropy: empty batch");
  LossResult<Scalar> r;
  r.grad.resize(probs.rows(), probs.cols());
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(probs.rows());
  const Scalar floor = Scalar(kProbabilityFloor);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const Scalar p = probs.data()[i];
    const Scalar logp = std::log(std::max(p, floor));
    r.value -= p * logp * inv_n;
    r.grad.data()[i] = -(logp + Scalar(1)) * inv_n;
  }
  return r;
}

}  // namespace rtnet
