#include "xaistudy/models/training.hpp"

#include <cmath>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/evaluation/metrics.hpp"

namespace xaistudy::models {

namespace {

double mean_bce(const Eigen::VectorXd& logits, const Eigen::VectorXd& y) {
  // log(1 + e^z) - y z, computed stably.
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y[i] * z;
  }
  return total / static_cast<double>(logits.size());
}

double penalty(const std::vector<DenseLayer>& layers, double l2) {
  double s = 0.0;
  for (const auto& l : layers) s += l.weights.squaredNorm();
  return 0.5 * l2 * s;
}

std::string echo(const ModelSpec& spec) { return to_json(spec).dump(); }

}  // namespace

TrainedModel train_on_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const ModelSpec& spec,
                             const std::string& data_fingerprint, TrainingRecord record) {
  spec.validate();
  if (x.rows() == 0) throw ValidationError("cannot train on zero rows");
  if (x.rows() != y.size()) throw ValidationError("feature rows and labels differ in length");
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd yd = y.cast<double>();

  Rng rng(derive_seed(spec.seed, "init"));
  std::vector<DenseLayer> layers;
  Eigen::Index fan_in = d;
  for (int h : spec.hidden_sizes) {
    DenseLayer l{Eigen::MatrixXd(h, fan_in), Eigen::VectorXd::Zero(h)};
    const double scale = std::sqrt(2.0 / static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = scale * rng.normal();
    layers.push_back(std::move(l));
    fan_in = h;
  }
  DenseLayer out{Eigen::MatrixXd::Zero(1, fan_in), Eigen::VectorXd::Zero(1)};
  if (!spec.hidden_sizes.empty()) {
    const double scale = 0.1 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index c = 0; c < fan_in; ++c) out.weights(0, c) = scale * rng.normal();
  }
  const double base_rate = std::clamp(yd.mean(), 1e-6, 1.0 - 1e-6);
  out.bias(0) = std::log(base_rate / (1.0 - base_rate));
  layers.push_back(std::move(out));

  const std::size_t L = layers.size();
  std::vector<Eigen::MatrixXd> acts(L);  // acts[i]: input to layer i, (width x n)
  std::vector<Eigen::MatrixXd> pre(L);

  auto forward = [&]() -> Eigen::VectorXd {
    acts[0] = x.transpose();
    for (std::size_t i = 0; i < L; ++i) {
      pre[i] = (layers[i].weights * acts[i]).colwise() + layers[i].bias;
      if (i + 1 < L) acts[i + 1] = pre[i].cwiseMax(0.0);
    }
    return pre[L - 1].row(0).transpose();
  };

  double loss = mean_bce(forward(), yd) + penalty(layers, spec.l2_penalty);
  record.initial_loss = loss;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    const Eigen::VectorXd z = pre[L - 1].row(0).transpose();
    Eigen::MatrixXd delta(1, n);
    for (Eigen::Index i = 0; i < n; ++i) delta(0, i) = (sigmoid(z[i]) - yd[i]) / static_cast<double>(n);
    for (std::size_t i = L; i-- > 0;) {
      const Eigen::MatrixXd grad_w = delta * acts[i].transpose() + spec.l2_penalty * layers[i].weights;
      const Eigen::VectorXd grad_b = delta.rowwise().sum();
      if (i > 0) {
        Eigen::MatrixXd back = layers[i].weights.transpose() * delta;
        delta = back.array() * (pre[i - 1].array() > 0.0).cast<double>();
      }
      layers[i].weights -= spec.learning_rate * grad_w;
      layers[i].bias -= spec.learning_rate * grad_b;
    }
    loss = mean_bce(forward(), yd) + penalty(layers, spec.l2_penalty);
    if (!std::isfinite(loss))
      throw NumericError("divergence", "training diverged at epoch " + std::to_string(epoch + 1) +
                                           " (non-finite loss); spec: " + echo(spec));
  }
  record.final_loss = loss;

  Fnv1a h;
  h.update(data_fingerprint).update(to_json(spec).dump());
  return TrainedModel(spec, std::move(layers), h.hex(), std::move(record));
}

TrainedModel train_model(const tabular::Dataset& dataset, const ModelSpec& spec) {
  const auto train = dataset.members(tabular::Split::train);
  if (train.empty()) throw ValidationError("train split is empty");
  const tabular::Encoder encoder = tabular::Encoder::fit(dataset);
  const Eigen::MatrixXd x = encoder.encode_rows(train);
  Eigen::VectorXi y(static_cast<Eigen::Index>(train.size()));
  Fnv1a ids;
  for (std::size_t i = 0; i < train.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = train[i]->label;
    ids.update(train[i]->id);
  }
  TrainingRecord record;
  record.codebook_hash = dataset.codebook.hash();
  record.scaler = tabular::to_json(encoder.scaler());
  if (dataset.split_params) {
    record.test_fraction = dataset.split_params->test_fraction;
    record.split_seed = dataset.split_params->seed;
  }
  const std::string data_fp = Fnv1a().update(ids.hex()).update(record.codebook_hash).hex();
  return train_on_matrix(x, y, spec, data_fp, std::move(record));
}

tabular::Encoder model_encoder(const TrainedModel& model, const tabular::Codebook& codebook) {
  if (model.record().codebook_hash.empty()) throw StateError("model carries no training record");
  if (model.record().codebook_hash != codebook.hash())
    throw ConflictError("codebook hash " + codebook.hash() + " does not match the model's training codebook " +
                        model.record().codebook_hash);
  tabular::Encoder enc(codebook, tabular::scaler_from_json(model.record().scaler));
  if (enc.dimension() != model.input_dim()) throw SchemaError("encoder width does not match the model input");
  return enc;
}

ModelMetrics metrics_from_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                      const std::vector<std::string>& groups,
                                      const std::optional<tabular::ProtectedAttribute>& attribute) {
  if (predicted.empty()) throw ValidationError("no predictions to evaluate");
  const auto c = evaluation::confusion(predicted, truth);
  ModelMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.f1 = evaluation::f1_score(c).f1;
  if (attribute) {
    m.protected_attribute = attribute->feature;
    const auto fair = evaluation::fairness_from(predicted, truth, groups, attribute->minority, attribute->majority);
    m.aaod = fair.aaod;
    m.eod = fair.eod;
  }
  return m;
}

ModelMetrics evaluate_model(const TrainedModel& model, const tabular::Dataset& dataset,
                            const tabular::Codebook& codebook,
                            const std::optional<std::string>& protected_attribute) {
  const auto test = dataset.members(tabular::Split::test);
  if (test.empty()) throw ValidationError("test split is empty");
  const auto encoder = model_encoder(model, codebook);
  std::optional<tabular::ProtectedAttribute> attr;
  if (protected_attribute) {
    attr = codebook.protected_attribute(*protected_attribute);
  } else if (!codebook.protected_attributes.empty()) {
    attr = codebook.protected_attributes.front();
  }
  std::vector<int> pred, truth;
  std::vector<std::string> groups;
  for (const auto* inst : test) {
    pred.push_back(model.predict(encoder.encode(*inst)).label);
    truth.push_back(inst->label);
    if (attr) groups.push_back(tabular::group_value(codebook.feature(attr->feature), inst->value(attr->feature)));
  }
  if (!attr) groups.assign(pred.size(), "");
  return metrics_from_predictions(pred, truth, groups, attr);
}

}  // namespace xaistudy::models
