#include <cmath>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/explainers/explainers.hpp"

namespace xaistudy::explainers {

namespace {

Attribution make(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config,
                 Eigen::VectorXd scores) {
  Attribution a;
  a.method = to_string(config.method);
  a.scores = std::move(scores);
  const auto p = model.predict(x);
  a.predicted_label = p.label;
  a.predicted_probability = p.probability;
  a.config_fingerprint = config.fingerprint();
  return a;
}

void check_input(const models::TrainedModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim())
    throw ValidationError("dimension_mismatch", "input has dimension " + std::to_string(x.size()) +
                                                    ", model expects " + std::to_string(model.input_dim()));
}

}  // namespace

Attribution vanilla_gradient(const models::TrainedModel& model, const Eigen::VectorXd& x,
                             const ExplainerConfig& config) {
  check_input(model, x);
  return make(model, x, config, model.input_gradient(x, config.target));
}

Attribution gradient_x_input(const models::TrainedModel& model, const Eigen::VectorXd& x,
                             const ExplainerConfig& config) {
  check_input(model, x);
  return make(model, x, config, model.input_gradient(x, config.target).cwiseProduct(x));
}

Attribution smoothgrad(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config) {
  check_input(model, x);
  config.validate(static_cast<std::size_t>(x.size()));
  const Eigen::Index d = x.size();
  Eigen::VectorXd sd = Eigen::VectorXd::Constant(d, config.sg_sigma);
  if (config.sg_column_scale.size()) sd = sd.cwiseProduct(config.sg_column_scale);

  Rng rng(derive_seed(config.seed, "smoothgrad"));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd noisy(d);
  for (int k = 0; k < config.sg_samples; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) noisy[i] = x[i] + sd[i] * rng.normal();
    const Eigen::VectorXd g = model.input_gradient(noisy, config.target);
    if (!g.allFinite())
      throw NumericError("non_finite_gradient", "SmoothGrad sample " + std::to_string(k) + " produced a non-finite gradient");
    sum += g;
  }
  return make(model, x, config, sum / static_cast<double>(config.sg_samples));
}

Attribution integrated_gradients(const models::TrainedModel& model, const Eigen::VectorXd& x,
                                 const ExplainerConfig& config) {
  check_input(model, x);
  config.validate(static_cast<std::size_t>(x.size()));
  const Eigen::VectorXd delta = x - config.baseline;
  const int m = config.ig_steps;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size());
  for (int k = 1; k <= m; ++k) {
    const double alpha = (static_cast<double>(k) - 0.5) / static_cast<double>(m);
    sum += model.input_gradient(config.baseline + alpha * delta, config.target);
  }
  return make(model, x, config, delta.cwiseProduct(sum) / static_cast<double>(m));
}

Attribution explain(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config) {
  switch (config.method) {
    case Method::grad: return vanilla_gradient(model, x, config);
    case Method::grad_x_input: return gradient_x_input(model, x, config);
    case Method::smoothgrad: return smoothgrad(model, x, config);
    case Method::integrated_gradients: return integrated_gradients(model, x, config);
    case Method::lime: return lime(model, x, config);
    case Method::kernel_shap: return kernel_shap(model, x, config);
  }
  throw ValidationError("unknown explainer method");
}

Attribution explain_instance(const models::TrainedModel& model, const tabular::Encoder& encoder,
                             const tabular::Instance& instance, const ExplainerConfig& config) {
  ExplainerConfig local = config;
  // Stochastic methods draw from a per-instance stream so results do not
  // depend on processing order.
  local.seed = derive_seed(config.seed, instance.id);
  const Eigen::VectorXd x = encoder.encode(instance);
  Attribution a = explain(model, x, local);
  a.instance_id = instance.id;
  a.config_fingerprint = config.fingerprint();
  a.feature_scores = encoder.aggregate(a.scores);
  return a;
}

}  // namespace xaistudy::explainers
