#pragma once

#include <string>

#include "xaistudy/models/model.hpp"
#include "xaistudy/tabular/codebook.hpp"

namespace xaistudy::models {

inline constexpr int kCheckpointVersion = 1;

Json to_json(const TrainedModel& model);
TrainedModel model_from_json(const Json& doc);

void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);
// Fails with ConflictError when the checkpoint was trained on a different
// codebook.
TrainedModel load_checkpoint(const std::string& path, const tabular::Codebook& codebook);

}  // namespace xaistudy::models
