#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xaistudy/common/condition.hpp"
#include "xaistudy/evaluation/metrics.hpp"
#include "xaistudy/tabular/codebook.hpp"

namespace xaistudy::evaluation {

struct MetricsReport {
  std::string condition;
  bool present = true;  // false when the export holds no rows for the condition
  std::size_t n_participants = 0;
  std::size_t n_decisions = 0;
  Estimate accuracy;
  Estimate f1;
  bool f1_degenerate = false;
  Estimate avg_time_s;
  std::optional<Estimate> over_reliance;
  std::optional<Estimate> under_reliance;
  std::optional<std::string> protected_attribute;
  std::optional<Fairness> fairness;
  std::map<std::string, LikertSummary> likert;
  std::vector<std::string> diagnostics;
};

struct ReportOptions {
  ErrorOptions errors;
  // Defaults to the codebook's first protected attribute.
  std::optional<std::string> protected_attribute;
  // Conditions that must appear; missing ones yield an absent row.
  std::vector<std::string> expected_conditions;
};

// One report row per condition, in canonical condition order.
std::vector<MetricsReport> build_report(const ResponseSet& export_set, const tabular::Codebook* codebook,
                                        const ReportOptions& options = {});

Json to_json(const MetricsReport& report);
Json to_json(const std::vector<MetricsReport>& reports);

// Aligned plain-text tables. The objective table follows the column order
// Condition, Accuracy, F1, Avg Time, Over-Reliance, Under-Reliance, AAOD, EOD.
std::string render_objective_table(const std::vector<MetricsReport>& reports);
std::string render_likert_table(const std::vector<MetricsReport>& reports);

}  // namespace xaistudy::evaluation
