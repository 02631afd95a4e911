#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xaistudy/common/clock.hpp"
#include "xaistudy/common/json_io.hpp"

namespace xaistudy::evaluation {

// One exported participant decision.
struct DecisionRecord {
  std::string study;
  std::string session;
  std::string participant;
  std::string condition;
  std::string instance;
  int human_decision = 0;
  // Prediction shown to the participant; empty under condition F.
  std::optional<int> ai_prediction;
  // The model's prediction for the instance whether or not it was shown.
  // Reliance under F is measured against this hidden prediction.
  std::optional<int> model_prediction;
  int ground_truth = 0;
  std::int64_t elapsed_ms = 0;
  TimestampMs served_at = 0;
  TimestampMs submitted_at = 0;
  // Protected attribute values of the instance, keyed by feature name.
  std::map<std::string, std::string> attributes;

  // Prediction that reliance is measured against.
  std::optional<int> reliance_reference() const { return ai_prediction ? ai_prediction : model_prediction; }
  bool operator==(const DecisionRecord&) const = default;
};

struct SurveyRecord {
  std::string study;
  std::string session;
  std::string participant;
  std::string condition;
  std::string question;
  int answer = 0;
  bool operator==(const SurveyRecord&) const = default;
};

struct Exclusion {
  std::string study;
  std::string session;
  std::string participant;
  std::string condition;
  std::string reason;  // "disqualified" or "incomplete:<phase>"
  bool operator==(const Exclusion&) const = default;
};

struct DemographicsRecord {
  std::string session;
  std::string participant;
  std::map<std::string, std::string> fields;
  bool operator==(const DemographicsRecord&) const = default;
};

struct ResponseSet {
  std::vector<DecisionRecord> decisions;
  std::vector<SurveyRecord> surveys;
  std::vector<DemographicsRecord> demographics;
  std::vector<Exclusion> exclusions;
  bool operator==(const ResponseSet&) const = default;
};

// Delimited export, one row per decision. Protected attribute values are
// appended as "attr:<feature>" columns.
std::string format_decisions_csv(const std::vector<DecisionRecord>& rows);
std::vector<DecisionRecord> parse_decisions_csv(const std::string& text);
std::string format_survey_csv(const std::vector<SurveyRecord>& rows);
std::vector<SurveyRecord> parse_survey_csv(const std::string& text);
std::string format_exclusions_csv(const std::vector<Exclusion>& rows);
std::vector<Exclusion> parse_exclusions_csv(const std::string& text);

Json to_json(const ResponseSet& set);
ResponseSet response_set_from_json(const Json& doc);

// Writes decisions.csv, survey.csv, exclusions.csv into `dir`.
void write_export_dir(const ResponseSet& set, const std::string& dir);
ResponseSet read_export_dir(const std::string& dir);

}  // namespace xaistudy::evaluation
