#include "rtnet/da_model.hpp"

#include "rtnet/coral.hpp"
#include "rtnet/losses.hpp"

namespace rtnet {

void DaHyperparams::validate() const {
  if (!(lambda_entropy >= 0) || !(lambda_coral >= 0)) throw ConfigError("loss weights must be non-negative");
  if (!(lr >= 0)) throw ConfigError("learning rate must be non-negative");
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
}

DaModel::DaModel(const DaArchitecture& arch, Rng& rng)
    : DaModel(Network({{arch.input_dim, arch.hidden, Activation::kRelu},
                       {arch.hidden, arch.feature_dim, Activation::kLinear}},
                      rng),
              Network({{arch.feature_dim, arch.num_classes, Activation::kSoftmax}}, rng)) {}

DaModel::DaModel(Network f, Network c)
    : features(std::move(f)), classifier(std::move(c)), features_opt(features), classifier_opt(classifier) {
  if (features.output_dim() != classifier.input_dim())
    throw ConfigError("DaModel: feature dimension does not match classifier input");
  if (classifier.layers().back().activation != Activation::kSoftmax)
    throw ConfigError("DaModel: classifier must end in softmax");
}

double source_ce_loss(const TensorXd& probs, const Labels& labels) { return cross_entropy(probs, labels).value; }

double target_entropy_loss(const TensorXd& probs) { return mean_entropy(probs).value; }

DaObjective da_objective(const DaModel& model, const TensorXd& source_x, const Labels& source_y,
                         const TensorXd& target_x, const DaHyperparams& hp) {
  if (source_x.rows() < 2) throw EmptySelectionError("da_objective: fewer than two selected source samples");
  if (target_x.rows() < 2) throw UsageError("da_objective: target batch needs at least two samples");

  const NetTrace fs = model.features.forward(source_x);
  const NetTrace cs = model.classifier.forward(fs.output());
  const NetTrace ft = model.features.forward(target_x);

  DaObjective obj;
  const auto ce = cross_entropy(cs.output(), source_y);
  obj.losses.source = ce.value;
  obj.classifier_grad = model.classifier.backward(cs, ce.grad);
  TensorXd d_source = obj.classifier_grad.input;
  TensorXd d_target = TensorXd::Zero(ft.output().rows(), ft.output().cols());

  if (hp.lambda_entropy > 0) {
    const NetTrace ct = model.classifier.forward(ft.output());
    const auto ent = mean_entropy(ct.output());
    obj.losses.entropy = ent.value;
    // Only the input gradient is kept: C's parameters do not see this term.
    d_target += hp.lambda_entropy * model.classifier.backward(ct, ent.grad).input;
  }
  if (hp.lambda_coral > 0) {
    const auto coral = coral_with_gradients(fs.output(), ft.output(), hp.coral_scaling);
    obj.losses.coral = coral.loss;
    d_source += hp.lambda_coral * coral.grad_source;
    d_target += hp.lambda_coral * coral.grad_target;
  }
  obj.losses.total = obj.losses.source + hp.lambda_entropy * obj.losses.entropy + hp.lambda_coral * obj.losses.coral;

  obj.features_grad = model.features.backward(fs, d_source);
  obj.features_grad += model.features.backward(ft, d_target);
  return obj;
}

DaLosses update_da_model(DaModel& model, const TensorXd& source_x, const Labels& source_y,
                         const TensorXd& target_x, const DaHyperparams& hp) {
  DaObjective obj = da_objective(model, source_x, source_y, target_x, hp);
  adam_step(model.features, obj.features_grad, model.features_opt, hp.lr);
  adam_step(model.classifier, obj.classifier_grad, model.classifier_opt, hp.lr);
  return obj.losses;
}

}  // namespace rtnet
