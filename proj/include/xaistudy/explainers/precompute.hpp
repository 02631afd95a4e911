#pragma once

#include <string>
#include <vector>

#include "xaistudy/common/clock.hpp"
#include "xaistudy/explainers/explainers.hpp"
#include "xaistudy/tabular/encoding.hpp"

namespace xaistudy::explainers {

struct FeatureScore {
  std::string feature;
  double score = 0.0;
  bool operator==(const FeatureScore&) const = default;
};

// Stored explanation for one (instance, method) pair.
struct ExplanationRecord {
  std::string instance_id;
  std::string method;
  std::string config_fingerprint;
  int predicted_label = 0;
  double predicted_probability = 0.0;
  std::vector<FeatureScore> feature_scores;  // codebook order
  std::vector<double> column_scores;         // encoded-column order
  TimestampMs created_at = 0;
  bool operator==(const ExplanationRecord&) const = default;
};

struct InstanceError {
  std::string instance_id;
  std::string message;
  bool operator==(const InstanceError&) const = default;
};

struct ExplanationSet {
  std::string model_fingerprint;
  std::string codebook_hash;
  std::string method;
  std::string config_fingerprint;
  std::vector<ExplanationRecord> records;  // pool order
  std::vector<InstanceError> errors;

  const ExplanationRecord* find(const std::string& instance_id) const;
  bool operator==(const ExplanationSet&) const = default;
};

Json to_json(const ExplanationRecord& record);
ExplanationRecord explanation_record_from_json(const Json& doc);
Json to_json(const ExplanationSet& set);
ExplanationSet explanation_set_from_json(const Json& doc);
void save_explanation_set(const ExplanationSet& set, const std::string& path);
ExplanationSet load_explanation_set(const std::string& path);

struct PrecomputeOptions {
  unsigned threads = 1;
  const Clock* clock = nullptr;  // SystemClock when null
};

// One record per pool instance. Failures are collected per instance; the
// successful records are kept. Results do not depend on thread count.
ExplanationSet precompute_pool(const models::TrainedModel& model, const tabular::Encoder& encoder,
                               const std::vector<tabular::Instance>& pool, const ExplainerConfig& config,
                               const PrecomputeOptions& options = {});

}  // namespace xaistudy::explainers
