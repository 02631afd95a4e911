#include "xaistudy/sim/behavior.hpp"

#include <cmath>
#include <numeric>

#include "xaistudy/common/error.hpp"

namespace xaistudy::sim {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0 && p <= 1)) throw ValidationError(std::string("behavior: ") + name + " must lie in [0, 1]");
}

void check_weights(const std::vector<double>& w, const std::string& what) {
  if (w.size() != 5) throw ValidationError("behavior: " + what + " needs five weights");
  double total = 0;
  for (double v : w) {
    if (!(v >= 0)) throw ValidationError("behavior: " + what + " has a negative weight");
    total += v;
  }
  if (!(total > 0)) throw ValidationError("behavior: " + what + " weights sum to zero");
}

}  // namespace

void BehaviorModel::validate() const {
  check_probability(base_accuracy, "base_accuracy");
  check_probability(adoption_prob, "adoption_prob");
  check_probability(attention_accuracy, "attention_accuracy");
  if (!(task_seconds_mean > 0)) throw ValidationError("behavior: per-task mean must be positive");
  if (task_seconds_sd < 0) throw ValidationError("behavior: per-task sd must be non-negative");
  check_weights(default_likert, "default_likert");
  for (const auto& [q, w] : likert_policy) check_weights(w, "likert_policy." + q);
}

Json to_json(const BehaviorModel& b) {
  return Json{{"base_accuracy", b.base_accuracy},
              {"adoption_prob", b.adoption_prob},
              {"per_task_seconds", {{"mean", b.task_seconds_mean}, {"sd", b.task_seconds_sd}}},
              {"likert_policy", b.likert_policy},
              {"default_likert", b.default_likert},
              {"attention_accuracy", b.attention_accuracy},
              {"seed", b.seed}};
}

BehaviorModel behavior_from_json(const Json& j) {
  try {
    BehaviorModel b;
    b.base_accuracy = j.value("base_accuracy", b.base_accuracy);
    b.adoption_prob = j.value("adoption_prob", b.adoption_prob);
    if (j.contains("per_task_seconds")) {
      b.task_seconds_mean = j["per_task_seconds"].value("mean", b.task_seconds_mean);
      b.task_seconds_sd = j["per_task_seconds"].value("sd", b.task_seconds_sd);
    }
    if (j.contains("likert_policy"))
      b.likert_policy = j["likert_policy"].get<std::map<std::string, std::vector<double>>>();
    b.default_likert = j.value("default_likert", b.default_likert);
    b.attention_accuracy = j.value("attention_accuracy", b.attention_accuracy);
    b.seed = j.value("seed", b.seed);
    b.validate();
    return b;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("behavior: ") + e.what());
  }
}

BehaviorModel load_behavior(const std::string& path) { return behavior_from_json(read_json_file(path)); }

SimulatedDecision simulate_decision(const BehaviorModel& b, const study::TaskPayload& payload, int ground_truth,
                                    Rng& rng) {
  SimulatedDecision d;
  if (payload.ai_prediction && rng.bernoulli(b.adoption_prob)) {
    d.decision = *payload.ai_prediction;
  } else {
    d.decision = rng.bernoulli(b.base_accuracy) ? ground_truth : 1 - ground_truth;
  }
  const double mean_ms = b.task_seconds_mean * 1000.0, sd_ms = b.task_seconds_sd * 1000.0;
  double ms = mean_ms;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ms = rng.normal(mean_ms, sd_ms);
    if (ms >= kMinElapsedMs) break;
  }
  d.elapsed_ms = std::max<std::int64_t>(kMinElapsedMs, std::llround(ms));
  return d;
}

int simulate_likert(const BehaviorModel& b, const std::string& question_id, Rng& rng) {
  auto it = b.likert_policy.find(question_id);
  const std::vector<double>& w = it != b.likert_policy.end() ? it->second : b.default_likert;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return static_cast<int>(i) + 1;
    u -= w[i];
  }
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0) return static_cast<int>(i) + 1;
  return 3;
}

Expectation expected_metrics(const BehaviorModel& b, double a, bool shown) {
  const double p = shown ? b.adoption_prob : 0.0;
  const double q = b.base_accuracy;
  Expectation e;
  e.accuracy = p * a + (1 - p) * q;
  e.over_reliance = p * (1 - a) + (1 - p) * (1 - a) * (1 - q);
  e.under_reliance = (1 - p) * a * (1 - q);
  return e;
}

}  // namespace xaistudy::sim
