#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xaistudy/models/model.hpp"
#include "xaistudy/tabular/encoding.hpp"

namespace xaistudy::models {

// Full-batch gradient descent on mean binary cross-entropy plus
// 0.5 * l2 * ||W||^2 (biases unpenalized). Deterministic for a fixed seed.
// The output bias starts at the logit of the training base rate, so a model
// trained for zero epochs predicts roughly the base rate.
TrainedModel train_on_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const ModelSpec& spec,
                             const std::string& data_fingerprint, TrainingRecord record = {});

// Trains on the dataset's train split only, standardizing with a scaler
// fitted on that split. The fingerprint hashes (train ids, codebook, spec).
TrainedModel train_model(const tabular::Dataset& dataset, const ModelSpec& spec);

// Rebuilds the encoder the model was trained with. Throws when the codebook
// differs from the one recorded at training time.
tabular::Encoder model_encoder(const TrainedModel& model, const tabular::Codebook& codebook);

struct ModelMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  // Absent (not zero) when the codebook has no protected attribute or a
  // group lacks support.
  std::optional<double> aaod;
  std::optional<double> eod;
  std::optional<std::string> protected_attribute;
};

// Metrics on the full test split, with the evaluation module's definitions.
ModelMetrics evaluate_model(const TrainedModel& model, const tabular::Dataset& dataset,
                            const tabular::Codebook& codebook,
                            const std::optional<std::string>& protected_attribute = std::nullopt);

// Same, on explicit predictions (used for the degenerate-predictor checks).
ModelMetrics metrics_from_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                      const std::vector<std::string>& groups,
                                      const std::optional<tabular::ProtectedAttribute>& attribute);

}  // namespace xaistudy::models
