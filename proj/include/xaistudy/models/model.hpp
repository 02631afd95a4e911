#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xaistudy/common/json_io.hpp"

namespace xaistudy::models {

enum class Family { logistic, neural };
enum class Activation { relu };
// Scalar model output that gradients and explanations refer to.
enum class Target { probability, logit };

std::string to_string(Family f);
std::string to_string(Target t);
Family parse_family(const std::string& s);
Target parse_target(const std::string& s);

struct ModelSpec {
  Family family = Family::neural;
  std::vector<int> hidden_sizes{64};
  Activation activation = Activation::relu;
  double l2_penalty = 1e-3;
  int epochs = 1000;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  double decision_threshold = 0.5;

  static ModelSpec logistic_defaults();
  static ModelSpec neural_defaults();
  void validate() const;
};

Json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const Json& doc);

// Affine layer, weights are (out x in).
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct Prediction {
  double probability = 0.0;
  int label = 0;
};

// Provenance carried by a trained model into its checkpoint.
struct TrainingRecord {
  std::string codebook_hash;
  Json scaler;  // serialized tabular::Scaler
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Feed-forward binary classifier: hidden affine+ReLU layers followed by one
// affine output unit and a sigmoid. The logistic family has no hidden layers.
// Immutable after construction; all methods are safe to call concurrently.
class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, std::vector<DenseLayer> layers, std::string fingerprint,
               TrainingRecord record = {});

  // Logistic model with explicit parameters; handy for analytic checks.
  static TrainedModel logistic(const Eigen::VectorXd& weights, double bias, double threshold = 0.5);

  double logit(const Eigen::VectorXd& x) const;
  double probability(const Eigen::VectorXd& x) const;
  double output(const Eigen::VectorXd& x, Target target) const;
  Prediction predict(const Eigen::VectorXd& x) const;

  // Gradient of the chosen scalar output with respect to the input.
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, Target target) const;

  // Batched logits, one per row.
  Eigen::VectorXd logits(const Eigen::MatrixXd& rows) const;

  const ModelSpec& spec() const { return spec_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t input_dim() const { return input_dim_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const TrainingRecord& record() const { return record_; }

 private:
  void check_dim(const Eigen::VectorXd& x) const;

  ModelSpec spec_;
  std::vector<DenseLayer> layers_;
  std::size_t input_dim_ = 0;
  std::string fingerprint_;
  TrainingRecord record_;
};

Prediction predict(const TrainedModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd input_gradient(const TrainedModel& model, const Eigen::VectorXd& x, Target target);

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace xaistudy::models
