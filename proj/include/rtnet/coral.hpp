#pragma once

#include "rtnet/tensor.hpp"

namespace rtnet {

/// How the centered second moment Z^T J_n Z (J_n = I - (1/n) 1 1^T) is scaled.
enum class CovarianceScaling {
  kScatter,  // Z^T J_n Z as is
  kSample,   // Z^T J_n Z / (n - 1); comparable across batch sizes
};

template <typename Scalar>
Scalar covariance_factor(CovarianceScaling s, Eigen::Index n) {
  return s == CovarianceScaling::kSample ? Scalar(1) / static_cast<Scalar>(n - 1) : Scalar(1);
}

template <typename Derived>
Tensor<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& z,
                                            CovarianceScaling scaling = CovarianceScaling::kScatter) {
  using Scalar = typename Derived::Scalar;
  if (z.rows() < 2) throw UsageError("covariance: need at least two rows");
  const Tensor<Scalar> centered = z.rowwise() - z.colwise().mean();
  return covariance_factor<Scalar>(scaling, z.rows()) * (centered.transpose() * centered);
}

template <typename Scalar>
struct CoralResult {
  Scalar loss = 0;
  Tensor<Scalar> grad_source;  // dL/dZ_s
  Tensor<Scalar> grad_target;  // dL/dZ_t
};

/// ||Cov(Z_s) - Cov(Z_t)||_F^2. Each domain is centered with its own batch size.
template <typename DerivedS, typename DerivedT>
typename DerivedS::Scalar coral_loss(const Eigen::MatrixBase<DerivedS>& zs, const Eigen::MatrixBase<DerivedT>& zt,
                                     CovarianceScaling scaling = CovarianceScaling::kScatter) {
  if (zs.cols() != zt.cols()) throw UsageError("coral_loss: feature dimensions differ");
  return (covariance(zs, scaling) - covariance(zt, scaling)).squaredNorm();
}

/// Loss and its gradients. With D = Cov_s - Cov_t (symmetric) and k_s, k_t
/// the covariance factors, dL/dZ_s = 4 k_s J Z_s D and dL/dZ_t = -4 k_t J Z_t D.
template <typename DerivedS, typename DerivedT>
CoralResult<typename DerivedS::Scalar> coral_with_gradients(const Eigen::MatrixBase<DerivedS>& zs,
                                                           const Eigen::MatrixBase<DerivedT>& zt,
                                                           CovarianceScaling scaling = CovarianceScaling::kScatter) {
  using Scalar = typename DerivedS::Scalar;
  if (zs.cols() != zt.cols()) throw UsageError("coral_loss: feature dimensions differ");
  if (zs.rows() < 2 || zt.rows() < 2) throw UsageError("coral_loss: need at least two rows per domain");
  const Tensor<Scalar> cs = zs.rowwise() - zs.colwise().mean();
  const Tensor<Scalar> ct = zt.rowwise() - zt.colwise().mean();
  const Scalar ks = covariance_factor<Scalar>(scaling, zs.rows());
  const Scalar kt = covariance_factor<Scalar>(scaling, zt.rows());
  const Tensor<Scalar> diff = ks * (cs.transpose() * cs) - kt * (ct.transpose() * ct);
  CoralResult<Scalar> r;
  r.loss = diff.squaredNorm();
  r.grad_source = (Scalar(4) * ks) * cs * diff;
  r.grad_target = (Scalar(-4) * kt) * ct * diff;
  return r;
}

}  // namespace rtnet
