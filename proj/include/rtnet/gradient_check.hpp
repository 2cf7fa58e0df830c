#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "rtnet/tensor.hpp"

namespace rtnet {

/// Largest coordinate-wise relative discrepancy between `analytic` and the
/// central difference (loss(p + eps e_i) - loss(p - eps e_i)) / (2 eps).
///
/// Each coordinate is scaled by max(|analytic|, |numeric|, floor); `floor`
/// keeps coordinates whose true gradient is zero from amplifying rounding
/// noise. Two exact zeros give an error of 0.
template <typename Scalar>
Scalar finite_diff_check(const std::function<Scalar(const Column<Scalar>&)>& loss, const Column<Scalar>& params,
                         const Column<Scalar>& analytic, Scalar eps, Scalar floor = Scalar(1e-6)) {
  if (!(eps > Scalar(0))) throw UsageError("finite_diff_check: eps must be positive");
  if (analytic.size() != params.size()) throw UsageError("finite_diff_check: gradient size mismatch");
  Column<Scalar> probe = params;
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + eps;
    const Scalar up = loss(probe);
    probe[i] = params[i] - eps;
    const Scalar down = loss(probe);
    probe[i] = params[i];
    if (!std::isfinite(up) || !std::isfinite(down)) throw NumericalError("finite_diff_check: non-finite loss");
    const Scalar numeric = (up - down) / (Scalar(2) * eps);
    const Scalar diff = std::abs(numeric - analytic[i]);
    if (diff == Scalar(0)) continue;
    const Scalar scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace rtnet
