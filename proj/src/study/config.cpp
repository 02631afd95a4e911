#include "xaistudy/study/config.hpp"

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"

namespace xaistudy::study {

std::string to_string(TimingMode m) { return m == TimingMode::server ? "server" : "client_dwell"; }

TimingMode parse_timing_mode(const std::string& s) {
  if (s == "server") return TimingMode::server;
  if (s == "client_dwell") return TimingMode::client_dwell;
  throw ValidationError("unknown timing mode '" + s + "'");
}

void StudyConfig::validate() const {
  auto require = [](const std::string& value, const char* field) {
    if (value.empty()) throw ValidationError("missing_field", std::string("study config: ") + field + " is required");
  };
  require(dataset_name, "dataset.name");
  require(data_path, "dataset.data");
  require(codebook_path, "dataset.codebook");
  require(checkpoint_path, "model.checkpoint");
  require(attention_bank_path, "banks.attention");
  require(survey_bank_path, "banks.survey");
  require(consent_text_path, "banks.consent");
  if (shows_explanation(condition) && (!explanations_path || explanations_path->empty()))
    throw ValidationError("missing_explanations",
                          "condition " + to_string(condition) + " needs a precomputed explanation set");
  if (pool_size == 0) throw ValidationError("pool_size must be positive");
  if (tasks_per_participant == 0) throw ValidationError("tasks_per_participant must be positive");
  if (tasks_per_participant > pool_size)
    throw ValidationError("tasks_per_participant (" + std::to_string(tasks_per_participant) +
                          ") exceeds pool_size (" + std::to_string(pool_size) + ")");
}

std::string StudyConfig::fingerprint() const { return xaistudy::fingerprint(to_json(*this).dump()); }

Json to_json(const StudyConfig& c) {
  Json explainer = Json::object();
  if (c.explanations_path) explainer["explanations"] = *c.explanations_path;
  Json banks{{"attention", c.attention_bank_path}, {"survey", c.survey_bank_path}, {"consent", c.consent_text_path}};
  if (c.instructions_text_path) banks["instructions"] = *c.instructions_text_path;
  return Json{{"name", c.name},
              {"dataset", {{"name", c.dataset_name}, {"data", c.data_path}, {"codebook", c.codebook_path}}},
              {"model", {{"checkpoint", c.checkpoint_path}}},
              {"explainer", explainer},
              {"condition", to_string(c.condition)},
              {"banks", banks},
              {"seeds", {{"pool", c.pool_seed}}},
              {"pool_size", c.pool_size},
              {"tasks_per_participant", c.tasks_per_participant},
              {"chart_caption", c.chart_caption},
              {"target_participants", c.target_participants},
              {"timing", to_string(c.timing)}};
}

StudyConfig study_config_from_json(const Json& doc, const std::string& base_path) {
  auto path = [&](const std::string& p) { return base_path.empty() || p.empty() ? p : resolve_relative(base_path, p); };
  try {
    StudyConfig c;
    c.name = doc.value("name", "");
    const Json& dataset = doc.at("dataset");
    c.dataset_name = dataset.at("name");
    c.data_path = path(dataset.at("data"));
    c.codebook_path = path(dataset.at("codebook"));
    c.checkpoint_path = path(doc.at("model").at("checkpoint"));
    if (doc.contains("explainer") && doc["explainer"].contains("explanations"))
      c.explanations_path = path(doc["explainer"]["explanations"]);
    c.condition = parse_condition(doc.at("condition").get<std::string>());
    const Json& banks = doc.at("banks");
    c.attention_bank_path = path(banks.at("attention"));
    c.survey_bank_path = path(banks.at("survey"));
    c.consent_text_path = path(banks.at("consent"));
    if (banks.contains("instructions")) c.instructions_text_path = path(banks["instructions"]);
    if (doc.contains("seeds")) c.pool_seed = doc["seeds"].value("pool", std::uint64_t{0});
    c.pool_size = doc.value("pool_size", std::size_t{200});
    c.tasks_per_participant = doc.value("tasks_per_participant", std::size_t{20});
    c.chart_caption = doc.value("chart_caption", std::string(kDefaultChartCaption));
    c.target_participants = doc.value("target_participants", std::size_t{30});
    c.timing = parse_timing_mode(doc.value("timing", "server"));
    return c;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("study config: ") + e.what());
  }
}

StudyConfig load_study_config(const std::string& path) {
  return study_config_from_json(read_json_file(path), path);
}

}  // namespace xaistudy::study
