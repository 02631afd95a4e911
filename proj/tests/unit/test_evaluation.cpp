#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "workspace.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/evaluation/metrics.hpp"
#include "xaistudy/evaluation/records.hpp"
#include "xaistudy/evaluation/report.hpp"

using namespace xaistudy;
using namespace xaistudy::evaluation;

namespace {

DecisionRecord row(const std::string& participant, int human, std::optional<int> ai, int truth,
                   const std::string& gender = "male", const std::string& condition = "FP") {
  DecisionRecord r;
  r.study = "st";
  r.session = "sess-" + participant;
  r.participant = participant;
  r.condition = condition;
  r.instance = "i";
  r.human_decision = human;
  r.ai_prediction = ai;
  r.model_prediction = ai;
  r.ground_truth = truth;
  r.elapsed_ms = 2000;
  r.attributes["gender"] = gender;
  return r;
}

}  // namespace

TEST_CASE("accuracy and F1 on a hand fixture") {
  std::vector<DecisionRecord> rs{row("a", 1, 1, 1), row("a", 1, 1, 0), row("b", 0, 0, 0), row("b", 0, 0, 1)};
  const auto af = compute_accuracy_f1(rs);
  CHECK(af.accuracy.value == 0.5);
  CHECK(af.f1.value == doctest::Approx(0.5));
  CHECK(af.precision == 0.5);
  CHECK(af.recall == 0.5);
}

TEST_CASE("F1 is degenerate without positives") {
  std::vector<DecisionRecord> rs{row("a", 0, 0, 0), row("a", 0, 0, 0)};
  const auto af = compute_accuracy_f1(rs);
  CHECK(af.f1_degenerate);
  CHECK(af.f1.value == 0.0);
}

TEST_CASE("F1 jackknife matches a direct leave-one-out computation") {
  Rng rng(3);
  std::vector<DecisionRecord> rs;
  for (int i = 0; i < 40; ++i) rs.push_back(row("p" + std::to_string(i % 5), rng.bernoulli(0.6), 1, rng.bernoulli(0.5)));
  const auto af = compute_accuracy_f1(rs);
  std::vector<double> loo;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (i == k) continue;
      tp += rs[i].human_decision == 1 && rs[i].ground_truth == 1;
      fp += rs[i].human_decision == 1 && rs[i].ground_truth == 0;
      fn += rs[i].human_decision == 0 && rs[i].ground_truth == 1;
    }
    loo.push_back(2.0 * tp / (2.0 * tp + fp + fn));
  }
  double m = 0, ss = 0;
  for (double v : loo) m += v / loo.size();
  for (double v : loo) ss += (v - m) * (v - m);
  const double n = static_cast<double>(loo.size());
  CHECK(af.f1.se == doctest::Approx(std::sqrt((n - 1) / n * ss)).epsilon(1e-12));
}

TEST_CASE("standard errors are SEM of per-response indicators, or of participant means when clustered") {
  std::vector<DecisionRecord> rs{row("a", 1, 1, 1), row("a", 1, 1, 1), row("b", 0, 0, 1), row("b", 1, 1, 1)};
  const auto pooled = compute_accuracy_f1(rs);
  CHECK(pooled.accuracy.value == 0.75);
  CHECK(pooled.accuracy.se == doctest::Approx(0.25));
  const auto clustered = compute_accuracy_f1(rs, {true});
  CHECK(clustered.accuracy.value == 0.75);
  // participant means 1.0 and 0.5: sd 0.3536, sem 0.25
  CHECK(clustered.accuracy.se == doctest::Approx(0.25));
}

TEST_CASE("reliance definitions") {
  std::vector<DecisionRecord> rs{
      row("a", 1, 1, 0),  // followed a wrong prediction: over
      row("a", 0, 1, 1),  // rejected a right prediction: under
      row("a", 1, 1, 1),  // correct
      row("a", 0, 1, 0),  // correct, rejected a wrong prediction
  };
  const auto rel = compute_reliance(rs);
  CHECK(rel.over.value == 0.25);
  CHECK(rel.under.value == 0.25);
}

TEST_CASE("reliance under F uses the hidden model prediction") {
  auto r = row("a", 1, std::nullopt, 0, "male", "F");
  r.model_prediction = 1;
  std::vector<DecisionRecord> rs{r};
  CHECK(compute_reliance(rs).over.value == 1.0);
  rs[0].model_prediction.reset();
  CHECK_THROWS_AS(compute_reliance(rs), ValidationError);
}

TEST_CASE("accuracy plus over- and under-reliance is one on random sets") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DecisionRecord> rs;
    const int n = 1 + static_cast<int>(rng.index(80));
    for (int i = 0; i < n; ++i)
      rs.push_back(row("p" + std::to_string(i % 7), rng.bernoulli(0.5), rng.bernoulli(0.5) ? 1 : 0, rng.bernoulli(0.5)));
    const double sum = compute_accuracy_f1(rs).accuracy.value + compute_reliance(rs).over.value +
                       compute_reliance(rs).under.value;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("reconstructed fixtures reproduce every published triple") {
  for (const auto& t : xstest::published_triples()) {
    CAPTURE(t.label);
    const auto rs = xstest::reconstruct_triple(t);
    const double acc = compute_accuracy_f1(rs).accuracy.value;
    const auto rel = compute_reliance(rs);
    CHECK(xstest::rounds_to(acc, t.accuracy, t.acc_decimals));
    CHECK(xstest::rounds_to(rel.over.value, t.over, t.over_decimals));
    CHECK(xstest::rounds_to(rel.under.value, t.under, t.under_decimals));
    CHECK(std::abs(acc + rel.over.value + rel.under.value - 1.0) <= 1e-12);
    CHECK(std::abs(t.accuracy + t.over + t.under - 1.0) <= 0.0015);
  }
}

TEST_CASE("fairness hand fixture: TPR 0.6/0.8 and FPR 0.3/0.1") {
  std::vector<int> pred, truth;
  std::vector<std::string> groups;
  auto add = [&](const std::string& g, int t, int p, int count) {
    for (int i = 0; i < count; ++i) {
      pred.push_back(p);
      truth.push_back(t);
      groups.push_back(g);
    }
  };
  add("female", 1, 1, 3);
  add("female", 1, 0, 2);
  add("female", 0, 1, 3);
  add("female", 0, 0, 7);
  add("male", 1, 1, 4);
  add("male", 1, 0, 1);
  add("male", 0, 1, 1);
  add("male", 0, 0, 9);
  const auto f = fairness_from(pred, truth, groups, "female", "male");
  CHECK(*f.minority.tpr == doctest::Approx(0.6));
  CHECK(*f.majority.fpr == doctest::Approx(0.1));
  CHECK(*f.eod == doctest::Approx(0.2));
  CHECK(*f.aaod == doctest::Approx(0.2));
}

TEST_CASE("fairness matches the brute-force oracle on random response sets") {
  Rng rng(2024);
  const std::vector<std::string> values{"female", "male", "other"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(60);
    std::vector<int> pred(n), truth(n);
    std::vector<std::string> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng.bernoulli(0.5);
      truth[i] = rng.bernoulli(0.4);
      groups[i] = values[rng.index(3)];
    }
    const auto got = fairness_from(pred, truth, groups, "female", "male");
    const auto want = xstest::brute_force_fairness(pred, truth, groups, "female", "male");
    REQUIRE(got.eod.has_value() == want.eod.has_value());
    REQUIRE(got.aaod.has_value() == want.aaod.has_value());
    if (want.eod) CHECK(std::abs(*got.eod - *want.eod) <= 1e-12);
    if (want.aaod) CHECK(std::abs(*got.aaod - *want.aaod) <= 1e-12);
  }
}

TEST_CASE("fairness from decisions requires the attribute") {
  std::vector<DecisionRecord> rs{row("a", 1, 1, 1)};
  rs[0].attributes.clear();
  CHECK_THROWS_AS(compute_fairness(rs, "gender", "female", "male"), ValidationError);
}

TEST_CASE("Likert aggregation") {
  const std::vector<int> two{1, 5};
  const auto s = aggregate_likert(two);
  CHECK(s.mean == 3.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(8.0)));
  CHECK(format_likert(s) == "M=3.00, SD=2.83");
  const std::vector<int> one{4};
  CHECK(aggregate_likert(one).sd == 0.0);
  const std::vector<int> bad{6};
  CHECK_THROWS_AS(aggregate_likert(bad), ValidationError);
  std::vector<SurveyRecord> survey{{"st", "s", "p", "FP", "Q4", 3}};
  CHECK_THROWS_AS(aggregate_likert(survey, "FP", "Q4"), ValidationError);
  CHECK_THROWS_AS(aggregate_likert(survey, "F", "Q1"), ValidationError);
}

TEST_CASE("display formatting") {
  CHECK(format_estimate({0.7581, 0.0201}, 3, 2) == "0.758±0.02");
  CHECK(format_estimate({5.934, 0.7102}, 2, 2) == "5.93±0.71");
  CHECK(format_estimate({3.7301, 0.5}, 2, 2) == "3.73±0.5");
  CHECK(format_rounded(0.29, 3) == "0.29");
}

TEST_CASE("average time in seconds") {
  std::vector<DecisionRecord> rs{row("a", 1, 1, 1), row("a", 1, 1, 1)};
  rs[1].elapsed_ms = 4000;
  CHECK(compute_avg_time(rs).value == 3.0);
  rs[1].elapsed_ms = -1;
  CHECK_THROWS_AS(compute_avg_time(rs), ValidationError);
}

TEST_CASE("export CSV round trips") {
  ResponseSet set;
  set.decisions = {row("a", 1, 1, 0, "female"), row("b", 0, std::nullopt, 1, "male", "F")};
  set.decisions[1].model_prediction = 0;
  set.surveys = {{"st", "sess-a", "a", "FP", "Q1", 4}};
  set.exclusions = {{"st", "sess-c", "c", "FP", "disqualified"}};
  CHECK(parse_decisions_csv(format_decisions_csv(set.decisions)) == set.decisions);
  CHECK(parse_survey_csv(format_survey_csv(set.surveys)) == set.surveys);
  CHECK(parse_exclusions_csv(format_exclusions_csv(set.exclusions)) == set.exclusions);
  CHECK(response_set_from_json(to_json(set)) == set);
  const auto dir = xstest::temp_dir("export");
  write_export_dir(set, dir.string());
  const auto back = read_export_dir(dir.string());
  CHECK(back.decisions == set.decisions);
  CHECK(back.exclusions == set.exclusions);
}

TEST_CASE("report rows follow canonical condition order and flag absent conditions") {
  ResponseSet set;
  set.decisions = {row("a", 1, 1, 1, "female", "FPE-SHAP"), row("b", 1, std::nullopt, 1, "male", "F")};
  ReportOptions opts;
  opts.protected_attribute = "gender";
  opts.expected_conditions = {"FP"};
  tabular::Codebook cb;
  cb.protected_attributes = {{"gender", "female", "male"}};
  const auto reports = build_report(set, &cb, opts);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].condition == "F");
  CHECK(reports[1].condition == "FP");
  CHECK_FALSE(reports[1].present);
  CHECK(reports[2].condition == "FPE-SHAP");
  const std::string table = render_objective_table(reports);
  CHECK(table.find("Accuracy") != std::string::npos);
  CHECK(table.find("AAOD") != std::string::npos);
}
