#include "xaistudy/evaluation/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "xaistudy/common/error.hpp"

namespace xaistudy::evaluation {

namespace {

int condition_rank(const std::string& name) {
  for (std::size_t i = 0; i < kAllConditions.size(); ++i)
    if (to_string(kAllConditions[i]) == name) return static_cast<int>(i);
  return static_cast<int>(kAllConditions.size());
}

int question_rank(const std::string& q) {
  if (q.size() > 1 && q[0] == 'Q') {
    try {
      return std::stoi(q.substr(1));
    } catch (const std::exception&) {
    }
  }
  return 1000;
}

Json estimate_json(const Estimate& e) { return Json{{"value", e.value}, {"se", e.se}}; }

std::string pad(const std::string& s, std::size_t width) {
  // Column widths count code points so "±" aligns.
  std::size_t cps = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cps;
  return s + std::string(width > cps ? width - cps : 0, ' ');
}

std::size_t display_width(const std::string& s) {
  std::size_t cps = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cps;
  return cps;
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], display_width(r[i]));
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += i + 1 == r.size() ? r[i] : pad(r[i], widths[i] + 2);
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

std::vector<MetricsReport> build_report(const ResponseSet& export_set, const tabular::Codebook* codebook,
                                        const ReportOptions& options) {
  std::map<std::string, std::vector<DecisionRecord>> by_condition;
  std::map<std::string, std::vector<SurveyRecord>> surveys_by_condition;
  for (const auto& d : export_set.decisions) by_condition[d.condition].push_back(d);
  for (const auto& s : export_set.surveys) surveys_by_condition[s.condition].push_back(s);

  std::set<std::string> names;
  for (const auto& [c, _] : by_condition) names.insert(c);
  for (const auto& c : options.expected_conditions) names.insert(c);
  std::vector<std::string> ordered(names.begin(), names.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const std::string& a, const std::string& b) { return condition_rank(a) < condition_rank(b); });

  std::optional<tabular::ProtectedAttribute> attr;
  if (codebook) {
    if (options.protected_attribute) {
      attr = codebook->protected_attribute(*options.protected_attribute);
    } else if (!codebook->protected_attributes.empty()) {
      attr = codebook->protected_attributes.front();
    }
  }

  std::vector<MetricsReport> out;
  for (const auto& name : ordered) {
    MetricsReport rep;
    rep.condition = name;
    auto it = by_condition.find(name);
    if (it == by_condition.end() || it->second.empty()) {
      rep.present = false;
      rep.diagnostics.push_back("no decisions exported for condition " + name);
      out.push_back(std::move(rep));
      continue;
    }
    const auto& rows = it->second;
    std::set<std::string> participants;
    for (const auto& r : rows) participants.insert(r.participant);
    rep.n_participants = participants.size();
    rep.n_decisions = rows.size();

    const auto af = compute_accuracy_f1(rows, options.errors);
    rep.accuracy = af.accuracy;
    rep.f1 = af.f1;
    rep.f1_degenerate = af.f1_degenerate;
    if (af.f1_degenerate) rep.diagnostics.push_back("F1 degenerate: no positive decisions and no positive labels");
    rep.avg_time_s = compute_avg_time(rows, options.errors);

    const bool covered = std::all_of(rows.begin(), rows.end(),
                                     [](const DecisionRecord& r) { return r.reliance_reference().has_value(); });
    if (covered) {
      const auto rel = compute_reliance(rows, options.errors);
      rep.over_reliance = rel.over;
      rep.under_reliance = rel.under;
      // Binary decisions: every response is exactly one of correct, wrongly
      // adopted, or wrongly rejected.
      const double identity = rep.accuracy.value + rel.over.value + rel.under.value;
      if (std::fabs(identity - 1.0) > 1e-12)
        throw NumericError("internal", "accuracy + over + under = " + std::to_string(identity) + " for " + name);
    } else {
      rep.diagnostics.push_back("reliance not computed: some responses carry no AI prediction");
    }

    if (attr) {
      rep.protected_attribute = attr->feature;
      const bool has_attr = std::all_of(rows.begin(), rows.end(), [&](const DecisionRecord& r) {
        return r.attributes.count(attr->feature) > 0;
      });
      if (has_attr) {
        rep.fairness = compute_fairness(rows, attr->feature, attr->minority, attr->majority);
        for (const auto& d : rep.fairness->diagnostics) rep.diagnostics.push_back(d);
      } else {
        rep.diagnostics.push_back("fairness not computed: export lacks attribute '" + attr->feature + "'");
      }
    }

    auto sit = surveys_by_condition.find(name);
    if (sit != surveys_by_condition.end()) {
      std::map<std::string, std::vector<int>> answers;
      for (const auto& s : sit->second) answers[s.question].push_back(s.answer);
      for (const auto& [q, a] : answers) rep.likert[q] = aggregate_likert(sit->second, name, q);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

Json to_json(const MetricsReport& r) {
  Json j{{"condition", r.condition}, {"present", r.present}, {"diagnostics", r.diagnostics}};
  if (!r.present) return j;
  j["n_participants"] = r.n_participants;
  j["n_decisions"] = r.n_decisions;
  j["accuracy"] = estimate_json(r.accuracy);
  j["f1"] = estimate_json(r.f1);
  j["f1_degenerate"] = r.f1_degenerate;
  j["avg_time_s"] = estimate_json(r.avg_time_s);
  j["over_reliance"] = r.over_reliance ? estimate_json(*r.over_reliance) : Json(nullptr);
  j["under_reliance"] = r.under_reliance ? estimate_json(*r.under_reliance) : Json(nullptr);
  if (r.protected_attribute) j["protected_attribute"] = *r.protected_attribute;
  if (r.fairness) {
    auto rates = [](const GroupRates& g) {
      return Json{{"group", g.group},
                  {"value", g.value},
                  {"tpr", g.tpr ? Json(*g.tpr) : Json(nullptr)},
                  {"fpr", g.fpr ? Json(*g.fpr) : Json(nullptr)},
                  {"support_pos", g.support_pos},
                  {"support_neg", g.support_neg}};
    };
    j["aaod"] = r.fairness->aaod ? Json(*r.fairness->aaod) : Json(nullptr);
    j["eod"] = r.fairness->eod ? Json(*r.fairness->eod) : Json(nullptr);
    j["group_rates"] = {rates(r.fairness->minority), rates(r.fairness->majority)};
  }
  Json likert = Json::object();
  for (const auto& [q, s] : r.likert) likert[q] = {{"mean", s.mean}, {"sd", s.sd}, {"n", s.n}};
  j["likert"] = likert;
  return j;
}

Json to_json(const std::vector<MetricsReport>& reports) {
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return Json{{"reports", arr}};
}

std::string render_objective_table(const std::vector<MetricsReport>& reports) {
  std::vector<std::vector<std::string>> rows{
      {"Condition", "Accuracy", "F1", "Avg Time", "Over-Reliance", "Under-Reliance", "AAOD", "EOD"}};
  for (const auto& r : reports) {
    if (!r.present) {
      rows.push_back({r.condition, "-", "-", "-", "-", "-", "-", "-"});
      continue;
    }
    auto opt_est = [](const std::optional<Estimate>& e) { return e ? format_estimate(*e, 3, 2) : std::string("-"); };
    auto opt_val = [](const std::optional<double>& v) { return v ? format_rounded(*v, 3) : std::string("-"); };
    rows.push_back({r.condition, format_estimate(r.accuracy, 3, 2), format_estimate(r.f1, 3, 2),
                    format_estimate(r.avg_time_s, 2, 2), opt_est(r.over_reliance), opt_est(r.under_reliance),
                    r.fairness ? opt_val(r.fairness->aaod) : "-", r.fairness ? opt_val(r.fairness->eod) : "-"});
  }
  return render(rows);
}

std::string render_likert_table(const std::vector<MetricsReport>& reports) {
  std::set<std::string> qset;
  for (const auto& r : reports)
    for (const auto& [q, _] : r.likert) qset.insert(q);
  std::vector<std::string> questions(qset.begin(), qset.end());
  std::sort(questions.begin(), questions.end(),
            [](const std::string& a, const std::string& b) { return question_rank(a) < question_rank(b); });
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Condition"};
  header.insert(header.end(), questions.begin(), questions.end());
  rows.push_back(header);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.condition};
    for (const auto& q : questions) {
      auto it = r.likert.find(q);
      row.push_back(it == r.likert.end() ? "-" : format_likert(it->second));
    }
    rows.push_back(std::move(row));
  }
  return render(rows);
}

}  // namespace xaistudy::evaluation
