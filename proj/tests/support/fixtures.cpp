#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace xstest {

using xaistudy::evaluation::DecisionRecord;

const std::vector<PublishedTriple>& published_triples() {
  static const std::vector<PublishedTriple> rows{
      {"german_credit F", 0.497, 0.192, 0.312, 3, 3, 3},
      {"german_credit FP", 0.624, 0.234, 0.143, 3, 3, 3},
      {"german_credit FPE-LIME", 0.602, 0.269, 0.129, 3, 3, 3},
      {"german_credit FPE-SHAP", 0.758, 0.198, 0.044, 3, 3, 3},
      {"german_credit FPE-SG", 0.552, 0.29, 0.158, 3, 2, 3},
      {"german_credit FPE-IG", 0.737, 0.168, 0.095, 3, 3, 3},
      {"rcdv F", 0.533, 0.219, 0.248, 3, 3, 3},
      {"rcdv FP", 0.545, 0.318, 0.137, 3, 3, 3},
      {"rcdv FPE-LIME", 0.58, 0.288, 0.132, 2, 3, 3},
      {"rcdv FPE-SHAP", 0.57, 0.29, 0.14, 2, 2, 2},
      {"rcdv FPE-SG", 0.528, 0.336, 0.136, 3, 3, 3},
      {"rcdv FPE-IG", 0.568, 0.283, 0.148, 3, 3, 3},
  };
  return rows;
}

bool rounds_to(double value, double printed, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::llround(value * scale) == std::llround(printed * scale);
}

std::vector<DecisionRecord> reconstruct_triple(const PublishedTriple& t) {
  for (long n = 1; n <= 100000; ++n) {
    const long a = std::lround(t.accuracy * static_cast<double>(n));
    const long o = std::lround(t.over * static_cast<double>(n));
    const long u = n - a - o;
    if (u < 0) continue;
    const double dn = static_cast<double>(n);
    if (!rounds_to(a / dn, t.accuracy, t.acc_decimals) || !rounds_to(o / dn, t.over, t.over_decimals) ||
        !rounds_to(u / dn, t.under, t.under_decimals))
      continue;
    std::vector<DecisionRecord> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      DecisionRecord r;
      r.study = "fixture";
      r.session = "s" + std::to_string(i % 30);
      r.participant = "p" + std::to_string(i % 30);
      r.condition = "FP";
      r.instance = "i" + std::to_string(i);
      r.ground_truth = static_cast<int>(i % 2);
      const int wrong = 1 - r.ground_truth;
      if (i < a) {
        r.human_decision = r.ground_truth;
        r.ai_prediction = (i % 3 == 0) ? wrong : r.ground_truth;
      } else if (i < a + o) {
        r.human_decision = wrong;
        r.ai_prediction = wrong;
      } else {
        r.human_decision = wrong;
        r.ai_prediction = r.ground_truth;
      }
      r.model_prediction = r.ai_prediction;
      r.elapsed_ms = 1000;
      rows.push_back(std::move(r));
    }
    return rows;
  }
  throw std::runtime_error("no integer fixture reproduces " + t.label);
}

namespace {

std::optional<double> rate(const std::vector<int>& predicted, const std::vector<int>& truth,
                           const std::vector<std::string>& groups, const std::string& group, int label) {
  std::vector<int> preds;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (groups[i] == group && truth[i] == label) preds.push_back(predicted[i]);
  if (preds.empty()) return std::nullopt;
  long ones = 0;
  for (int p : preds) ones += p;
  return static_cast<double>(ones) / static_cast<double>(preds.size());
}

}  // namespace

OracleFairness brute_force_fairness(const std::vector<int>& predicted, const std::vector<int>& truth,
                                    const std::vector<std::string>& groups, const std::string& minority,
                                    const std::string& majority) {
  OracleFairness o;
  o.tpr_min = rate(predicted, truth, groups, minority, 1);
  o.tpr_maj = rate(predicted, truth, groups, majority, 1);
  o.fpr_min = rate(predicted, truth, groups, minority, 0);
  o.fpr_maj = rate(predicted, truth, groups, majority, 0);
  if (o.tpr_min && o.tpr_maj) {
    o.eod = std::abs(*o.tpr_min - *o.tpr_maj);
    if (o.fpr_min && o.fpr_maj) o.aaod = (std::abs(*o.fpr_min - *o.fpr_maj) + *o.eod) / 2.0;
  }
  return o;
}

}  // namespace xstest

namespace xstest {

Eigen::VectorXd finite_difference_gradient(const xaistudy::models::TrainedModel& model, const Eigen::VectorXd& x,
                                           xaistudy::models::Target target, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (model.output(up, target) - model.output(down, target)) / (2.0 * h);
  }
  return g;
}

double relative_gradient_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-12);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace xstest

namespace xstest {

Eigen::VectorXd shapley_by_subsets(const xaistudy::models::TrainedModel& model, const Eigen::VectorXd& x,
                                   const Eigen::MatrixXd& background, xaistudy::models::Target target) {
  const auto d = static_cast<int>(x.size());
  const unsigned full = 1u << d;
  std::vector<double> v(full, 0.0);
  for (unsigned s = 0; s < full; ++s) {
    double total = 0.0;
    for (Eigen::Index b = 0; b < background.rows(); ++b) {
      Eigen::VectorXd z = background.row(b).transpose();
      for (int i = 0; i < d; ++i)
        if (s & (1u << i)) z[i] = x[i];
      total += model.output(z, target);
    }
    v[s] = total / static_cast<double>(background.rows());
  }
  std::vector<double> fact(static_cast<std::size_t>(d) + 1, 1.0);
  for (int i = 1; i <= d; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
  for (unsigned s = 0; s < full; ++s) {
    const int size = __builtin_popcount(s);
    for (int i = 0; i < d; ++i) {
      if (s & (1u << i)) continue;
      const double weight = fact[static_cast<std::size_t>(size)] * fact[static_cast<std::size_t>(d - size - 1)] /
                            fact[static_cast<std::size_t>(d)];
      phi[i] += weight * (v[s | (1u << i)] - v[s]);
    }
  }
  return phi;
}

}  // namespace xstest

namespace xstest {

OraclePower simulate_anova_power(const std::vector<double>& means, double sd, int n, double f_crit, long sims,
                                 std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, sd);
  const auto k = static_cast<int>(means.size());
  std::vector<double> group_mean(static_cast<std::size_t>(k));
  long rejections = 0;
  std::vector<double> draws(static_cast<std::size_t>(n));
  for (long s = 0; s < sims; ++s) {
    double grand = 0.0, within = 0.0;
    for (int g = 0; g < k; ++g) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        draws[static_cast<std::size_t>(i)] = means[static_cast<std::size_t>(g)] + noise(gen);
        sum += draws[static_cast<std::size_t>(i)];
      }
      const double m = sum / n;
      group_mean[static_cast<std::size_t>(g)] = m;
      grand += sum;
      for (int i = 0; i < n; ++i) within += (draws[static_cast<std::size_t>(i)] - m) * (draws[static_cast<std::size_t>(i)] - m);
    }
    grand /= static_cast<double>(k) * n;
    double between = 0.0;
    for (double m : group_mean) between += n * (m - grand) * (m - grand);
    const double f = (between / (k - 1)) / (within / (k * (n - 1.0)));
    rejections += f > f_crit;
  }
  const double p = static_cast<double>(rejections) / static_cast<double>(sims);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(sims))};
}

}  // namespace xstest

namespace xstest {

using namespace xaistudy::card;

namespace {

std::string random_text(std::mt19937_64& gen) {
  static const std::vector<std::string> pieces{
      "alpha", " ", "beta", "\n", "\\", "\\n", "  ", "answer: x", "link:", "é", "→", "Design phase:", "3.",
      "4 (a).", "\t", "\r\n", "\"q\"", "#", "—", "0.5", "not_applicable:", "Extension z:"};
  std::uniform_int_distribution<std::size_t> count(1, 12), pick(0, pieces.size() - 1);
  std::string s;
  const std::size_t n = count(gen);
  for (std::size_t i = 0; i < n; ++i) s += pieces[pick(gen)];
  // Whitespace-only text counts as unanswered.
  if (s.find_first_not_of(" \t\r\n") == std::string::npos) s += "gamma";
  return s;
}

ItemAnswer random_answer(std::mt19937_64& gen, bool design_one) {
  ItemAnswer a;
  std::bernoulli_distribution coin(0.5);
  if (coin(gen) || design_one) {
    a.answer = random_text(gen);
  } else {
    a.not_applicable = random_text(gen);
  }
  if (design_one) {
    a.preregistered = coin(gen);
    if (*a.preregistered || coin(gen)) a.link = "https://example.org/" + std::to_string(gen() % 1000);
  }
  return a;
}

}  // namespace

EvaluationCard random_valid_card(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  EvaluationCard c;
  c.title = random_text(gen);
  c.study_config_fingerprint = std::to_string(gen());
  for (const auto& item : checklist())
    c.phase(item.phase)[item.key] = random_answer(gen, item.phase == Phase::design && item.key == "1");
  const auto sections = gen() % 3;
  for (std::uint64_t s = 0; s < sections; ++s) {
    ExtensionSection sec;
    sec.name = "section_" + std::to_string(s);
    const auto items = 1 + gen() % 3;
    for (std::uint64_t i = 0; i < items; ++i)
      sec.items.push_back({std::to_string(i + 1), random_text(gen), random_answer(gen, false)});
    c.extensions.push_back(sec);
  }
  return c;
}

}  // namespace xstest
