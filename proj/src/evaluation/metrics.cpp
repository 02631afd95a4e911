#include "xaistudy/evaluation/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "xaistudy/common/condition.hpp"
#include "xaistudy/common/error.hpp"

namespace xaistudy::evaluation {

namespace {

void require_nonempty(std::span<const DecisionRecord> responses, const char* what) {
  if (responses.empty()) throw ValidationError(std::string(what) + " needs at least one response");
}

// Per-unit values (one per response, or per-participant means) feeding a
// standard error.
Estimate unit_estimate(std::span<const DecisionRecord> responses, ErrorOptions opts,
                       const auto& value_of) {
  std::vector<double> values;
  if (!opts.clustered_by_participant) {
    values.reserve(responses.size());
    for (const auto& r : responses) values.push_back(value_of(r));
    return mean_and_se(values);
  }
  std::map<std::string, std::pair<double, long>> per;
  double total = 0.0;
  for (const auto& r : responses) {
    const double v = value_of(r);
    auto& slot = per[r.participant];
    slot.first += v;
    slot.second += 1;
    total += v;
  }
  for (const auto& [p, s] : per) values.push_back(s.first / static_cast<double>(s.second));
  Estimate e = mean_and_se(values);
  // Point estimate stays the response-level mean.
  e.value = total / static_cast<double>(responses.size());
  return e;
}

}  // namespace

Estimate mean_and_se(std::span<const double> values) {
  Estimate e;
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  e.value = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.value) * (v - e.value);
    e.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return e;
}

Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ValidationError("prediction and truth lengths differ");
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == 1) {
      (truth[i] == 1 ? c.tp : c.fp)++;
    } else {
      (truth[i] == 1 ? c.fn : c.tn)++;
    }
  }
  return c;
}

F1Score f1_score(const Confusion& c) {
  F1Score s;
  const long pred_pos = c.tp + c.fp;
  const long actual_pos = c.tp + c.fn;
  if (pred_pos == 0 && actual_pos == 0) {
    s.degenerate = true;
    return s;
  }
  s.precision = pred_pos ? static_cast<double>(c.tp) / static_cast<double>(pred_pos) : 0.0;
  s.recall = actual_pos ? static_cast<double>(c.tp) / static_cast<double>(actual_pos) : 0.0;
  // 2TP / (2TP + FP + FN) equals the harmonic mean and avoids 0/0.
  s.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
  return s;
}

AccuracyF1 compute_accuracy_f1(std::span<const DecisionRecord> responses, ErrorOptions opts) {
  require_nonempty(responses, "accuracy/F1");
  AccuracyF1 out;
  out.accuracy = unit_estimate(responses, opts, [](const DecisionRecord& r) {
    return r.human_decision == r.ground_truth ? 1.0 : 0.0;
  });

  auto add = [](Confusion& c, const DecisionRecord& r, long sign) {
    if (r.human_decision == 1) {
      (r.ground_truth == 1 ? c.tp : c.fp) += sign;
    } else {
      (r.ground_truth == 1 ? c.fn : c.tn) += sign;
    }
  };
  Confusion all;
  for (const auto& r : responses) add(all, r, 1);
  const F1Score full = f1_score(all);
  out.f1.value = full.f1;
  out.precision = full.precision;
  out.recall = full.recall;
  out.f1_degenerate = full.degenerate;

  // Jackknife over units.
  std::map<std::string, Confusion> unit_counts;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    const std::string key = opts.clustered_by_participant ? r.participant : std::to_string(i);
    add(unit_counts[key], r, 1);
  }
  const double g = static_cast<double>(unit_counts.size());
  if (unit_counts.size() > 1) {
    std::vector<double> loo;
    loo.reserve(unit_counts.size());
    for (const auto& [key, c] : unit_counts) {
      Confusion rest{all.tp - c.tp, all.fp - c.fp, all.tn - c.tn, all.fn - c.fn};
      loo.push_back(f1_score(rest).f1);
    }
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= g;
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    out.f1.se = std::sqrt((g - 1.0) / g * ss);
  }
  return out;
}

Reliance compute_reliance(std::span<const DecisionRecord> responses, ErrorOptions opts) {
  require_nonempty(responses, "reliance");
  for (const auto& r : responses) {
    if (!r.reliance_reference())
      throw ValidationError("missing_ai_prediction",
                            "response for instance " + r.instance + " in session " + r.session +
                                " carries no AI prediction");
  }
  Reliance out;
  out.over = unit_estimate(responses, opts, [](const DecisionRecord& r) {
    const int ai = *r.reliance_reference();
    return (r.human_decision == ai && ai != r.ground_truth) ? 1.0 : 0.0;
  });
  out.under = unit_estimate(responses, opts, [](const DecisionRecord& r) {
    const int ai = *r.reliance_reference();
    return (r.human_decision != ai && ai == r.ground_truth) ? 1.0 : 0.0;
  });
  return out;
}

Estimate compute_avg_time(std::span<const DecisionRecord> responses, ErrorOptions opts) {
  require_nonempty(responses, "average time");
  for (const auto& r : responses)
    if (r.elapsed_ms < 0) throw ValidationError("negative elapsed_ms in session " + r.session);
  return unit_estimate(responses, opts,
                       [](const DecisionRecord& r) { return static_cast<double>(r.elapsed_ms) / 1000.0; });
}

namespace {

void fill_rates(GroupRates& g, const Confusion& c) {
  g.support_pos = c.tp + c.fn;
  g.support_neg = c.fp + c.tn;
  if (g.support_pos > 0) g.tpr = static_cast<double>(c.tp) / static_cast<double>(g.support_pos);
  if (g.support_neg > 0) g.fpr = static_cast<double>(c.fp) / static_cast<double>(g.support_neg);
}

}  // namespace

Fairness fairness_from(std::span<const int> predicted, std::span<const int> truth, std::span<const std::string> groups,
                       const std::string& minority_value, const std::string& majority_value) {
  if (predicted.size() != truth.size() || truth.size() != groups.size())
    throw ValidationError("fairness inputs have mismatched lengths");
  Fairness out;
  out.minority.group = "minority";
  out.minority.value = minority_value;
  out.majority.group = "majority";
  out.majority.value = majority_value;

  std::array<Confusion, 2> counts{};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    int slot;
    if (groups[i] == minority_value) {
      slot = 0;
    } else if (groups[i] == majority_value) {
      slot = 1;
    } else {
      continue;
    }
    auto& c = counts[slot];
    if (predicted[i] == 1) {
      (truth[i] == 1 ? c.tp : c.fp)++;
    } else {
      (truth[i] == 1 ? c.fn : c.tn)++;
    }
  }
  fill_rates(out.minority, counts[0]);
  fill_rates(out.majority, counts[1]);
  for (const GroupRates* g : {&out.minority, &out.majority}) {
    std::string who = g->group;
    who.append(" group ('").append(g->value).append("')");
    if (!g->tpr) out.diagnostics.push_back(who + " has no positive-label support");
    if (!g->fpr) out.diagnostics.push_back(who + " has no negative-label support");
  }
  if (out.minority.tpr && out.majority.tpr) {
    const double tpr_gap = std::fabs(*out.minority.tpr - *out.majority.tpr);
    out.eod = tpr_gap;
    if (out.minority.fpr && out.majority.fpr)
      out.aaod = 0.5 * (std::fabs(*out.minority.fpr - *out.majority.fpr) + tpr_gap);
  }
  return out;
}

Fairness compute_fairness(std::span<const DecisionRecord> responses, const std::string& protected_feature,
                          const std::string& minority_value, const std::string& majority_value) {
  std::vector<int> pred, truth;
  std::vector<std::string> groups;
  for (const auto& r : responses) {
    auto it = r.attributes.find(protected_feature);
    if (it == r.attributes.end())
      throw ValidationError("missing_attribute", "response for instance " + r.instance +
                                                     " does not carry protected attribute '" + protected_feature + "'");
    pred.push_back(r.human_decision);
    truth.push_back(r.ground_truth);
    groups.push_back(it->second);
  }
  return fairness_from(pred, truth, groups, minority_value, majority_value);
}

LikertSummary aggregate_likert(std::span<const int> answers) {
  LikertSummary s;
  s.n = answers.size();
  if (answers.empty()) return s;
  std::vector<double> values;
  for (int a : answers) {
    if (a < 1 || a > 5) throw ValidationError("likert_range", "Likert answer " + std::to_string(a) + " outside 1..5");
    values.push_back(a);
  }
  const Estimate e = mean_and_se(values);
  s.mean = e.value;
  s.sd = e.se * std::sqrt(static_cast<double>(values.size()));
  return s;
}

LikertSummary aggregate_likert(std::span<const SurveyRecord> responses, const std::string& condition,
                               const std::string& question_id) {
  if (!default_question_visible(parse_condition(condition), question_id))
    throw ValidationError("question_not_visible", question_id + " is not shown in condition " + condition);
  std::vector<int> answers;
  for (const auto& r : responses)
    if (r.condition == condition && r.question == question_id) answers.push_back(r.answer);
  return aggregate_likert(answers);
}

std::string format_rounded(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string format_estimate(const Estimate& e, int value_decimals, int se_decimals) {
  return format_rounded(e.value, value_decimals) + "±" + format_rounded(e.se, se_decimals);
}

std::string format_likert(const LikertSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "M=%.2f, SD=%.2f", s.mean, s.sd);
  return buf;
}

}  // namespace xaistudy::evaluation
