#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xaistudy/common/json_io.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/study/service.hpp"

namespace xaistudy::sim {

inline constexpr std::int64_t kMinElapsedMs = 200;

struct BehaviorModel {
  double base_accuracy = 0.7;   // unassisted correctness probability
  double adoption_prob = 0.5;   // probability of copying a shown AI prediction
  double task_seconds_mean = 6.0;
  double task_seconds_sd = 2.0;
  // Weights over answers 1..5 per question id; `default_likert` otherwise.
  std::map<std::string, std::vector<double>> likert_policy;
  std::vector<double> default_likert{1, 1, 1, 1, 1};
  // Per-item probability of answering an attention item correctly.
  double attention_accuracy = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

Json to_json(const BehaviorModel& b);
BehaviorModel behavior_from_json(const Json& doc);
BehaviorModel load_behavior(const std::string& path);

struct SimulatedDecision {
  int decision = 0;
  std::int64_t elapsed_ms = 0;
};

// With an AI prediction shown: copy it with adoption_prob, otherwise decide
// independently. Independent decisions are correct with base_accuracy.
// Elapsed time is a normal draw truncated below at kMinElapsedMs.
SimulatedDecision simulate_decision(const BehaviorModel& behavior, const study::TaskPayload& payload,
                                    int ground_truth, Rng& rng);

int simulate_likert(const BehaviorModel& behavior, const std::string& question_id, Rng& rng);

// Closed-form expectations for one condition. `ai_accuracy` is the model's
// accuracy on the served instances. When no prediction is shown, reliance
// is measured against the hidden model prediction.
struct Expectation {
  double accuracy = 0.0;
  double over_reliance = 0.0;
  double under_reliance = 0.0;
};

Expectation expected_metrics(const BehaviorModel& behavior, double ai_accuracy, bool prediction_shown);

}  // namespace xaistudy::sim
