#pragma once

#include "rtnet/adam.hpp"
#include "rtnet/coral.hpp"
#include "rtnet/dense_network.hpp"
#include "rtnet/random.hpp"

namespace rtnet {

struct DaHyperparams {
  double lambda_entropy = 1.0;  // weight of the target entropy term
  double lambda_coral = 7.0;    // weight of the covariance alignment term
  double lr = 1e-4;
  int batch_size = 32;
  CovarianceScaling coral_scaling = CovarianceScaling::kScatter;

  void validate() const;
};

struct DaArchitecture {
  Eigen::Index input_dim = 8;
  Eigen::Index hidden = 32;
  Eigen::Index feature_dim = 16;
  Eigen::Index num_classes = 6;
};

/// Thrown when fewer than two source samples survive selection; the caller
/// substitutes the full batch.
class EmptySelectionError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Shared feature extractor and classifier.
/// The last layer of `features` is the adaptation layer whose outputs are aligned.
struct DaModel {
  Network features;
  Network classifier;
  AdamState<double> features_opt;
  AdamState<double> classifier_opt;

  DaModel() = default;
  DaModel(const DaArchitecture& arch, Rng& rng);
  DaModel(Network features, Network classifier);

  Eigen::Index feature_dim() const { return features.output_dim(); }
  Eigen::Index num_classes() const { return classifier.output_dim(); }

  TensorXd embed(const TensorXd& x) const { return features.evaluate(x); }
  /// Class probabilities C(F(x)).
  TensorXd predict(const TensorXd& x) const { return classifier.evaluate(features.evaluate(x)); }
};

double source_ce_loss(const TensorXd& probs, const Labels& labels);
double target_entropy_loss(const TensorXd& probs);

struct DaLosses {
  double source = 0;   // L_s
  double entropy = 0;  // L_t
  double coral = 0;    // L_c
  double total = 0;    // L_s + lambda_entropy L_t + lambda_coral L_c
};

struct DaObjective {
  DaLosses losses;
  NetGradients features_grad;
  NetGradients classifier_grad;
};

/// Value and gradients of the combined objective. The entropy term reaches the
/// feature extractor only; the classifier gradient carries no entropy part.
/// Terms with a zero weight are skipped and reported as 0.
DaObjective da_objective(const DaModel& model, const TensorXd& source_x, const Labels& source_y,
                         const TensorXd& target_x, const DaHyperparams& hp);

/// One Adam step on F and C. Returns the pre-update losses.
DaLosses update_da_model(DaModel& model, const TensorXd& source_x, const Labels& source_y,
                         const TensorXd& target_x, const DaHyperparams& hp);

}  // namespace rtnet
