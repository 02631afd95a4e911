#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xaistudy/models/model.hpp"
#include "xaistudy/tabular/encoding.hpp"

namespace xaistudy::explainers {

enum class Method { grad, grad_x_input, smoothgrad, integrated_gradients, lime, kernel_shap };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct ExplainerConfig {
  Method method = Method::integrated_gradients;
  models::Target target = models::Target::logit;

  // Integrated gradients reference point x'.
  Eigen::VectorXd baseline;
  int ig_steps = 256;

  // SmoothGrad noise: column i gets sd = sg_sigma * sg_column_scale[i]
  // (scale 1 when the vector is empty).
  double sg_sigma = 0.1;
  Eigen::VectorXd sg_column_scale;
  int sg_samples = 50;

  int lime_samples = 1000;
  std::optional<double> lime_kernel_width;  // default 0.75 * sqrt(d)
  double lime_ridge = 1e-3;

  // One background row per line.
  Eigen::MatrixXd shap_background;
  // 0 means 2d + 2048.
  int shap_coalition_samples = 0;
  // Enumerate every coalition instead of sampling; requires d <= kMaxExactPlayers.
  bool shap_exact = false;

  std::uint64_t seed = 0;

  // Throws ValidationError when a field the method needs is absent or out
  // of range for input dimension d.
  void validate(std::size_t d) const;
  Json to_json() const;
  static ExplainerConfig from_json(const Json& doc);
  std::string fingerprint() const;

  int coalition_budget(std::size_t d) const;
  double kernel_width(std::size_t d) const;
};

inline constexpr std::size_t kMaxExactPlayers = 20;
inline constexpr std::size_t kMaxOraclePlayers = 12;

// Defaults derived from the training split: IG baseline = encoded train mean,
// SmoothGrad column scale = encoded train range, SHAP background = 100 train
// rows sampled with `seed`.
ExplainerConfig default_config(Method method, const tabular::Encoder& encoder, const tabular::Dataset& dataset,
                               std::uint64_t seed);

}  // namespace xaistudy::explainers
