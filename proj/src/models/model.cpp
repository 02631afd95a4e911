#include "xaistudy/models/model.hpp"

#include <cmath>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"

namespace xaistudy::models {

std::string to_string(Family f) { return f == Family::logistic ? "logistic" : "neural"; }
std::string to_string(Target t) { return t == Target::logit ? "logit" : "probability"; }

Family parse_family(const std::string& s) {
  if (s == "logistic") return Family::logistic;
  if (s == "neural") return Family::neural;
  throw ValidationError("unknown model family '" + s + "'");
}

Target parse_target(const std::string& s) {
  if (s == "logit") return Target::logit;
  if (s == "probability") return Target::probability;
  throw ValidationError("unknown target '" + s + "'");
}

ModelSpec ModelSpec::logistic_defaults() {
  ModelSpec s;
  s.family = Family::logistic;
  s.hidden_sizes.clear();
  s.l2_penalty = 1e-3;
  s.epochs = 2000;
  s.learning_rate = 0.5;
  return s;
}

ModelSpec ModelSpec::neural_defaults() { return ModelSpec{}; }

void ModelSpec::validate() const {
  if (family == Family::neural && hidden_sizes.empty())
    throw ValidationError("neural model needs at least one hidden layer");
  if (family == Family::logistic && !hidden_sizes.empty())
    throw ValidationError("logistic model takes no hidden layers");
  for (int h : hidden_sizes)
    if (h < 1) throw ValidationError("hidden layer sizes must be positive");
  if (!(l2_penalty >= 0.0)) throw ValidationError("l2_penalty must be >= 0");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(decision_threshold > 0.0 && decision_threshold < 1.0))
    throw ValidationError("decision_threshold must lie in (0, 1)");
}

Json to_json(const ModelSpec& s) {
  return Json{{"family", to_string(s.family)},
              {"hidden_sizes", s.hidden_sizes},
              {"activation", "relu"},
              {"l2_penalty", s.l2_penalty},
              {"epochs", s.epochs},
              {"learning_rate", s.learning_rate},
              {"seed", s.seed},
              {"decision_threshold", s.decision_threshold}};
}

ModelSpec model_spec_from_json(const Json& doc) {
  const Family family = parse_family(doc.value("family", std::string("neural")));
  ModelSpec s = family == Family::logistic ? ModelSpec::logistic_defaults() : ModelSpec::neural_defaults();
  if (doc.contains("hidden_sizes")) s.hidden_sizes = doc["hidden_sizes"].get<std::vector<int>>();
  if (doc.value("activation", std::string("relu")) != "relu")
    throw ValidationError("only the relu activation is supported");
  s.l2_penalty = doc.value("l2_penalty", s.l2_penalty);
  s.epochs = doc.value("epochs", s.epochs);
  s.learning_rate = doc.value("learning_rate", s.learning_rate);
  s.seed = doc.value("seed", s.seed);
  s.decision_threshold = doc.value("decision_threshold", s.decision_threshold);
  s.validate();
  return s;
}

TrainedModel::TrainedModel(ModelSpec spec, std::vector<DenseLayer> layers, std::string fingerprint,
                           TrainingRecord record)
    : spec_(std::move(spec)), layers_(std::move(layers)), fingerprint_(std::move(fingerprint)),
      record_(std::move(record)) {
  if (layers_.empty()) throw ValidationError("model has no layers");
  if (layers_.size() != spec_.hidden_sizes.size() + 1)
    throw ValidationError("layer count does not match the spec's hidden sizes");
  input_dim_ = static_cast<std::size_t>(layers_.front().weights.cols());
  Eigen::Index prev = layers_.front().weights.cols();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.cols() != prev || l.bias.size() != l.weights.rows())
      throw ValidationError("inconsistent parameter shapes in layer " + std::to_string(i));
    if (i + 1 < layers_.size() && l.weights.rows() != spec_.hidden_sizes[i])
      throw ValidationError("layer " + std::to_string(i) + " width does not match the spec");
    prev = l.weights.rows();
  }
  if (prev != 1) throw ValidationError("output layer must have a single unit");
}

TrainedModel TrainedModel::logistic(const Eigen::VectorXd& weights, double bias, double threshold) {
  ModelSpec spec = ModelSpec::logistic_defaults();
  spec.decision_threshold = threshold;
  spec.epochs = 0;
  DenseLayer out{weights.transpose(), Eigen::VectorXd::Constant(1, bias)};
  Fnv1a h;
  for (Eigen::Index i = 0; i < weights.size(); ++i) h.update(weights[i]);
  h.update(bias);
  return TrainedModel(spec, {out}, "logistic-" + h.hex());
}

void TrainedModel::check_dim(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim_)
    throw ValidationError("dimension_mismatch", "input has dimension " + std::to_string(x.size()) +
                                                    ", model expects " + std::to_string(input_dim_));
}

double TrainedModel::logit(const Eigen::VectorXd& x) const {
  check_dim(x);
  Eigen::VectorXd a = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    a = (layers_[i].weights * a + layers_[i].bias).cwiseMax(0.0);
  }
  return (layers_.back().weights * a + layers_.back().bias)(0);
}

double TrainedModel::probability(const Eigen::VectorXd& x) const { return sigmoid(logit(x)); }

double TrainedModel::output(const Eigen::VectorXd& x, Target target) const {
  return target == Target::logit ? logit(x) : probability(x);
}

Prediction TrainedModel::predict(const Eigen::VectorXd& x) const {
  const double p = probability(x);
  // Ties at the threshold resolve to the positive label.
  return {p, p >= spec_.decision_threshold ? 1 : 0};
}

Eigen::VectorXd TrainedModel::input_gradient(const Eigen::VectorXd& x, Target target) const {
  check_dim(x);
  // Forward pass keeping the ReLU masks.
  std::vector<Eigen::ArrayXd> masks;
  Eigen::VectorXd a = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    const Eigen::VectorXd z = layers_[i].weights * a + layers_[i].bias;
    masks.push_back((z.array() > 0.0).cast<double>());
    a = z.cwiseMax(0.0);
  }
  const double out_logit = (layers_.back().weights * a + layers_.back().bias)(0);
  Eigen::VectorXd grad = layers_.back().weights.row(0).transpose();
  for (std::size_t i = layers_.size() - 1; i-- > 0;) {
    grad = layers_[i].weights.transpose() * (grad.array() * masks[i]).matrix();
  }
  if (target == Target::probability) {
    const double p = sigmoid(out_logit);
    grad *= p * (1.0 - p);
  }
  return grad;
}

Eigen::VectorXd TrainedModel::logits(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != input_dim_)
    throw ValidationError("dimension_mismatch", "batch has " + std::to_string(rows.cols()) + " columns, model expects " +
                                                    std::to_string(input_dim_));
  Eigen::MatrixXd a = rows.transpose();
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    a = ((layers_[i].weights * a).colwise() + layers_[i].bias).cwiseMax(0.0);
  }
  Eigen::MatrixXd out = (layers_.back().weights * a).array() + layers_.back().bias(0);
  return out.row(0).transpose();
}

Prediction predict(const TrainedModel& model, const Eigen::VectorXd& x) { return model.predict(x); }

Eigen::VectorXd input_gradient(const TrainedModel& model, const Eigen::VectorXd& x, Target target) {
  return model.input_gradient(x, target);
}

}  // namespace xaistudy::models
