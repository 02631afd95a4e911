#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xaistudy/evaluation/records.hpp"

namespace xaistudy::evaluation {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Standard errors are pooled over responses by default. The clustered
// variant treats each participant as one unit.
struct ErrorOptions {
  bool clustered_by_participant = false;
};

struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

Confusion confusion(std::span<const int> predicted, std::span<const int> truth);

// F1 on the positive class (label 1). `degenerate` is set when there are no
// positive predictions and no positive labels; F1 is then 0.
struct F1Score {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool degenerate = false;
};
F1Score f1_score(const Confusion& c);

struct AccuracyF1 {
  Estimate accuracy;
  Estimate f1;  // se by leave-one-unit-out jackknife
  double precision = 0.0;
  double recall = 0.0;
  bool f1_degenerate = false;
};

AccuracyF1 compute_accuracy_f1(std::span<const DecisionRecord> responses, ErrorOptions opts = {});

struct Reliance {
  Estimate over;
  Estimate under;
};

// Denominator is every response. Uses the shown AI prediction, or the hidden
// model prediction when none was shown.
Reliance compute_reliance(std::span<const DecisionRecord> responses, ErrorOptions opts = {});

// Seconds.
Estimate compute_avg_time(std::span<const DecisionRecord> responses, ErrorOptions opts = {});

struct GroupRates {
  std::string group;  // "minority" | "majority"
  std::string value;  // attribute value defining the group
  std::optional<double> tpr;
  std::optional<double> fpr;
  long support_pos = 0;
  long support_neg = 0;
};

struct Fairness {
  std::optional<double> aaod;
  std::optional<double> eod;
  GroupRates minority;
  GroupRates majority;
  std::vector<std::string> diagnostics;
};

// Core formulas on aligned vectors; `groups` holds the attribute value of
// each row.
Fairness fairness_from(std::span<const int> predicted, std::span<const int> truth,
                       std::span<const std::string> groups, const std::string& minority_value,
                       const std::string& majority_value);

// Human decisions against ground truth, grouped by the record's attribute.
Fairness compute_fairness(std::span<const DecisionRecord> responses, const std::string& protected_feature,
                          const std::string& minority_value, const std::string& majority_value);

struct LikertSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample (n - 1) standard deviation; 0 when n == 1
  std::size_t n = 0;
};

LikertSummary aggregate_likert(std::span<const int> answers);
// Refuses questions that are not visible in `condition`.
LikertSummary aggregate_likert(std::span<const SurveyRecord> responses, const std::string& condition,
                               const std::string& question_id);

Estimate mean_and_se(std::span<const double> values);

// Display formatting mirroring the published tables: "0.758±0.02",
// "5.93±0.71", "M=3.33, SD=1.22".
std::string format_estimate(const Estimate& e, int value_decimals, int se_decimals);
std::string format_rounded(double value, int decimals);
std::string format_likert(const LikertSummary& s);

}  // namespace xaistudy::evaluation
