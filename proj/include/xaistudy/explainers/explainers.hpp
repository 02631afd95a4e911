#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "xaistudy/explainers/config.hpp"
#include "xaistudy/models/model.hpp"

namespace xaistudy::explainers {

struct Attribution {
  std::string instance_id;
  std::string method;
  Eigen::VectorXd scores;          // one per encoded column
  Eigen::VectorXd feature_scores;  // one per codebook feature (sum over its columns)
  int predicted_label = 0;
  double predicted_probability = 0.0;
  std::string config_fingerprint;
  // KernelSHAP / oracle base value phi_0 = mean over background of f(b).
  std::optional<double> base_value;
};

// The gradient family.
Attribution vanilla_gradient(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config);
Attribution gradient_x_input(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config);
Attribution smoothgrad(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config);
// Midpoint rule: scores_i = (x_i - x'_i) * mean_k grad_i(x' + (k - 0.5)/m (x - x')).
Attribution integrated_gradients(const models::TrainedModel& model, const Eigen::VectorXd& x,
                                 const ExplainerConfig& config);

// Local weighted ridge surrogate in the encoded space.
Attribution lime(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config);

struct RidgeFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
};
// argmin sum_k w_k (y_k - a - z_k . b)^2 + ridge ||b||^2 with an unpenalized
// intercept. Throws NumericError when ridge == 0 and the system is singular.
RidgeFit weighted_ridge(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                        double ridge);

// Shapley value function v(S) = mean_b f(x_S, b_{not S}).
class CoalitionGame {
 public:
  CoalitionGame(const models::TrainedModel& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& background,
                models::Target target);
  std::size_t players() const { return static_cast<std::size_t>(x_.size()); }
  // mask[i] true keeps x_i.
  double value(const std::vector<bool>& mask) const;
  // Batched: one coalition per row of `masks` (entries 0/1).
  Eigen::VectorXd values(const Eigen::MatrixXi& masks) const;
  double full_value() const;   // f(x)
  double empty_value() const;  // phi_0

 private:
  const models::TrainedModel& model_;
  Eigen::VectorXd x_;
  Eigen::MatrixXd background_;
  models::Target target_;
};

// Shapley-kernel weighted least squares with efficiency enforced exactly.
// Enumerates every coalition when shap_exact is set or when 2^d - 2 fits in
// the coalition budget; otherwise samples paired coalitions.
Attribution kernel_shap(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config);

// Direct subset-sum definition; d <= kMaxOraclePlayers.
Attribution exact_shapley_oracle(const models::TrainedModel& model, const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& background, models::Target target);

// Dispatches on config.method.
Attribution explain(const models::TrainedModel& model, const Eigen::VectorXd& x, const ExplainerConfig& config);

// Encodes, explains, and fills id / feature_scores / prediction fields.
Attribution explain_instance(const models::TrainedModel& model, const tabular::Encoder& encoder,
                             const tabular::Instance& instance, const ExplainerConfig& config);

}  // namespace xaistudy::explainers
