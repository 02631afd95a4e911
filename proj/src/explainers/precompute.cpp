#include "xaistudy/explainers/precompute.hpp"

#include <algorithm>
#include <optional>
#include <thread>

#include "xaistudy/common/error.hpp"

namespace xaistudy::explainers {

const ExplanationRecord* ExplanationSet::find(const std::string& instance_id) const {
  for (const auto& r : records)
    if (r.instance_id == instance_id) return &r;
  return nullptr;
}

Json to_json(const ExplanationRecord& r) {
  Json scores = Json::array();
  for (const auto& f : r.feature_scores) scores.push_back({{"feature", f.feature}, {"score", f.score}});
  return Json{{"instance_id", r.instance_id},
              {"method", r.method},
              {"config_fingerprint", r.config_fingerprint},
              {"predicted_label", r.predicted_label},
              {"predicted_probability", r.predicted_probability},
              {"feature_scores", scores},
              {"column_scores", r.column_scores},
              {"created_at", r.created_at}};
}

ExplanationRecord explanation_record_from_json(const Json& j) {
  ExplanationRecord r;
  r.instance_id = j.at("instance_id");
  r.method = j.at("method");
  r.config_fingerprint = j.at("config_fingerprint");
  r.predicted_label = j.at("predicted_label");
  r.predicted_probability = j.at("predicted_probability");
  for (const auto& f : j.at("feature_scores")) r.feature_scores.push_back({f.at("feature"), f.at("score")});
  r.column_scores = j.value("column_scores", std::vector<double>{});
  r.created_at = j.value("created_at", TimestampMs{0});
  return r;
}

Json to_json(const ExplanationSet& set) {
  Json records = Json::array();
  for (const auto& r : set.records) records.push_back(to_json(r));
  Json errors = Json::array();
  for (const auto& e : set.errors) errors.push_back({{"instance_id", e.instance_id}, {"message", e.message}});
  return Json{{"format", "xaistudy-explanations"},
              {"model_fingerprint", set.model_fingerprint},
              {"codebook_hash", set.codebook_hash},
              {"method", set.method},
              {"config_fingerprint", set.config_fingerprint},
              {"records", records},
              {"errors", errors}};
}

ExplanationSet explanation_set_from_json(const Json& doc) {
  try {
    if (doc.value("format", "") != "xaistudy-explanations") throw SchemaError("not an explanation set");
    ExplanationSet set;
    set.model_fingerprint = doc.at("model_fingerprint");
    set.codebook_hash = doc.at("codebook_hash");
    set.method = doc.at("method");
    set.config_fingerprint = doc.at("config_fingerprint");
    for (const auto& r : doc.at("records")) set.records.push_back(explanation_record_from_json(r));
    for (const auto& e : doc.at("errors")) set.errors.push_back({e.at("instance_id"), e.at("message")});
    return set;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("explanation set: ") + e.what());
  }
}

void save_explanation_set(const ExplanationSet& set, const std::string& path) {
  write_json_file(path, to_json(set), -1);
}

ExplanationSet load_explanation_set(const std::string& path) { return explanation_set_from_json(read_json_file(path)); }

ExplanationSet precompute_pool(const models::TrainedModel& model, const tabular::Encoder& encoder,
                               const std::vector<tabular::Instance>& pool, const ExplainerConfig& config,
                               const PrecomputeOptions& options) {
  SystemClock system_clock;
  const Clock& clock = options.clock ? *options.clock : system_clock;

  ExplanationSet set;
  set.model_fingerprint = model.fingerprint();
  set.codebook_hash = encoder.codebook().hash();
  set.method = to_string(config.method);
  set.config_fingerprint = config.fingerprint();
  if (pool.empty()) return set;
  config.validate(encoder.dimension());

  std::vector<std::optional<ExplanationRecord>> results(pool.size());
  std::vector<std::optional<std::string>> failures(pool.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const Attribution a = explain_instance(model, encoder, pool[i], config);
        ExplanationRecord r;
        r.instance_id = a.instance_id;
        r.method = a.method;
        r.config_fingerprint = a.config_fingerprint;
        r.predicted_label = a.predicted_label;
        r.predicted_probability = a.predicted_probability;
        const auto& groups = encoder.schema().groups;
        for (std::size_t g = 0; g < groups.size(); ++g)
          r.feature_scores.push_back({groups[g].feature, a.feature_scores[static_cast<Eigen::Index>(g)]});
        r.column_scores.assign(a.scores.data(), a.scores.data() + a.scores.size());
        r.created_at = clock.now_ms();
        results[i] = std::move(r);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };

  const unsigned threads = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(pool.size())));
  if (threads == 1) {
    work(0, pool.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t per = (pool.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * per;
      const std::size_t end = std::min(pool.size(), begin + per);
      if (begin < end) workers.emplace_back(work, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (results[i]) set.records.push_back(std::move(*results[i]));
    if (failures[i]) set.errors.push_back({pool[i].id, *failures[i]});
  }
  return set;
}

}  // namespace xaistudy::explainers
