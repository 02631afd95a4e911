#include "xaistudy/study/service.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"
#include "xaistudy/common/rng.hpp"
#include "xaistudy/explainers/precompute.hpp"
#include "xaistudy/models/checkpoint.hpp"
#include "xaistudy/models/training.hpp"
#include "xaistudy/tabular/sampling.hpp"

namespace xaistudy::study {

std::string to_string(Phase p) {
  switch (p) {
    case Phase::consent: return "consent";
    case Phase::instructions: return "instructions";
    case Phase::tasks: return "tasks";
    case Phase::survey: return "survey";
    case Phase::done: return "done";
    case Phase::disqualified: return "disqualified";
  }
  return "consent";
}

Phase parse_phase(const std::string& s) {
  for (Phase p : {Phase::consent, Phase::instructions, Phase::tasks, Phase::survey, Phase::done, Phase::disqualified})
    if (to_string(p) == s) return p;
  throw SchemaError("unknown phase '" + s + "'");
}

bool is_terminal(Phase p) { return p == Phase::done || p == Phase::disqualified; }

const PoolItem& StudyRecord::item(const std::string& instance_id) const {
  for (const auto& p : pool)
    if (p.instance_id == instance_id) return p;
  throw NotFoundError("instance '" + instance_id + "' is not in the study pool");
}

// ---- serialization -------------------------------------------------------

namespace {

Json rows_json(const std::vector<FeatureRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) out.push_back({{"name", r.name}, {"description", r.description}, {"value", r.value}});
  return out;
}

std::vector<FeatureRow> rows_from(const Json& j) {
  std::vector<FeatureRow> out;
  for (const auto& r : j) out.push_back({r.at("name"), r.at("description"), r.at("value")});
  return out;
}

Json long_json(const std::vector<LongExplanation>& items) {
  Json out = Json::array();
  for (const auto& e : items) out.push_back({{"feature", e.feature}, {"text", e.text}});
  return out;
}

std::vector<LongExplanation> long_from(const Json& j) {
  std::vector<LongExplanation> out;
  for (const auto& e : j) out.push_back({e.at("feature"), e.at("text")});
  return out;
}

Json scores_json(const std::vector<ScoredFeature>& items) {
  Json out = Json::array();
  for (const auto& s : items) out.push_back({{"feature", s.feature}, {"score", s.score}});
  return out;
}

std::vector<ScoredFeature> scores_from(const Json& j) {
  std::vector<ScoredFeature> out;
  for (const auto& s : j) out.push_back({s.at("feature"), s.at("score")});
  return out;
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

Json to_json(const StudyRecord& r) {
  Json pool = Json::array();
  for (const auto& p : r.pool) {
    pool.push_back({{"instance_id", p.instance_id},
                    {"ground_truth", p.ground_truth},
                    {"model_prediction", p.model_prediction},
                    {"model_probability", p.model_probability},
                    {"features", rows_json(p.features)},
                    {"long_explanations", long_json(p.long_explanations)},
                    {"attributes", p.attributes},
                    {"attributions", scores_json(p.attributions)}});
  }
  return Json{{"study_id", r.study_id},
              {"config", to_json(r.config)},
              {"config_fingerprint", r.config_fingerprint},
              {"model_fingerprint", r.model_fingerprint},
              {"codebook_hash", r.codebook_hash},
              {"explanation_fingerprint", opt(r.explanation_fingerprint)},
              {"label_name", r.label_name},
              {"positive_label_meaning", r.positive_label_meaning},
              {"negative_label_meaning", r.negative_label_meaning},
              {"pool", pool},
              {"survey", to_json(r.survey)},
              {"attention", to_json(r.attention)},
              {"consent_text", r.consent_text},
              {"instructions_text", r.instructions_text},
              {"created_at", r.created_at}};
}

StudyRecord study_record_from_json(const Json& j) {
  try {
    StudyRecord r;
    r.study_id = j.at("study_id");
    r.config = study_config_from_json(j.at("config"));
    r.config_fingerprint = j.at("config_fingerprint");
    r.model_fingerprint = j.at("model_fingerprint");
    r.codebook_hash = j.at("codebook_hash");
    r.explanation_fingerprint = opt_from<std::string>(j, "explanation_fingerprint");
    r.label_name = j.at("label_name");
    r.positive_label_meaning = j.at("positive_label_meaning");
    r.negative_label_meaning = j.at("negative_label_meaning");
    for (const auto& p : j.at("pool")) {
      PoolItem item;
      item.instance_id = p.at("instance_id");
      item.ground_truth = p.at("ground_truth");
      item.model_prediction = p.at("model_prediction");
      item.model_probability = p.at("model_probability");
      item.features = rows_from(p.at("features"));
      item.long_explanations = long_from(p.at("long_explanations"));
      item.attributes = p.at("attributes").get<std::map<std::string, std::string>>();
      item.attributions = scores_from(p.at("attributions"));
      r.pool.push_back(std::move(item));
    }
    r.survey = survey_bank_from_json(j.at("survey"));
    r.attention = attention_bank_from_json(j.at("attention"));
    r.consent_text = j.at("consent_text");
    r.instructions_text = j.at("instructions_text");
    r.created_at = j.at("created_at");
    return r;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("study record: ") + e.what());
  }
}

Json to_json(const Session& s) {
  Json responses = Json::array();
  for (const auto& r : s.responses) {
    responses.push_back({{"instance_id", r.instance_id},
                         {"human_decision", r.human_decision},
                         {"ai_prediction", opt(r.ai_prediction)},
                         {"ground_truth", r.ground_truth},
                         {"elapsed_ms", r.elapsed_ms},
                         {"served_at", r.served_at},
                         {"submitted_at", r.submitted_at},
                         {"client_dwell_ms", opt(r.client_dwell_ms)}});
  }
  return Json{{"session_id", s.session_id},
              {"study_id", s.study_id},
              {"participant_id", s.participant_id},
              {"condition", to_string(s.condition)},
              {"phase", to_string(s.phase)},
              {"task_list", s.task_list},
              {"task_cursor", s.task_cursor},
              {"created_at", s.created_at},
              {"updated_at", s.updated_at},
              {"served_at", opt(s.served_at)},
              {"virtual_now", s.virtual_now},
              {"responses", responses},
              {"survey_answers", s.survey_answers},
              {"demographics", s.demographics}};
}

Session session_from_json(const Json& j) {
  try {
    Session s;
    s.session_id = j.at("session_id");
    s.study_id = j.at("study_id");
    s.participant_id = j.at("participant_id");
    s.condition = parse_condition(j.at("condition").get<std::string>());
    s.phase = parse_phase(j.at("phase"));
    s.task_list = j.at("task_list").get<std::vector<std::string>>();
    s.task_cursor = j.at("task_cursor");
    s.created_at = j.at("created_at");
    s.updated_at = j.at("updated_at");
    s.served_at = opt_from<TimestampMs>(j, "served_at");
    s.virtual_now = j.value("virtual_now", TimestampMs{0});
    for (const auto& r : j.at("responses")) {
      TaskResponse t;
      t.instance_id = r.at("instance_id");
      t.human_decision = r.at("human_decision");
      t.ai_prediction = opt_from<int>(r, "ai_prediction");
      t.ground_truth = r.at("ground_truth");
      t.elapsed_ms = r.at("elapsed_ms");
      t.served_at = r.at("served_at");
      t.submitted_at = r.at("submitted_at");
      t.client_dwell_ms = opt_from<std::int64_t>(r, "client_dwell_ms");
      s.responses.push_back(std::move(t));
    }
    s.survey_answers = j.at("survey_answers").get<std::map<std::string, int>>();
    s.demographics = j.at("demographics").get<std::map<std::string, std::string>>();
    return s;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("session: ") + e.what());
  }
}

Json to_json(const TaskPayload& p) {
  Json j{{"session_id", p.session_id},
         {"task_index", p.task_index},
         {"task_count", p.task_count},
         {"instance_id", p.instance_id},
         {"label_name", p.label_name},
         {"outcomes", {{"0", p.negative_label_meaning}, {"1", p.positive_label_meaning}}},
         {"features", rows_json(p.features)},
         {"long_explanations", long_json(p.long_explanations)},
         {"served_at", p.served_at}};
  if (p.ai_prediction) j["ai_prediction"] = *p.ai_prediction;
  if (p.method) {
    j["method"] = *p.method;
    j["attributions"] = scores_json(p.attributions);
    j["chart_caption"] = p.chart_caption.value_or("");
  }
  return j;
}

TaskPayload task_payload_from_json(const Json& j) {
  try {
    TaskPayload p;
    p.session_id = j.at("session_id");
    p.task_index = j.at("task_index");
    p.task_count = j.at("task_count");
    p.instance_id = j.at("instance_id");
    p.label_name = j.at("label_name");
    p.negative_label_meaning = j.at("outcomes").at("0");
    p.positive_label_meaning = j.at("outcomes").at("1");
    p.features = rows_from(j.at("features"));
    p.long_explanations = long_from(j.at("long_explanations"));
    p.ai_prediction = opt_from<int>(j, "ai_prediction");
    p.method = opt_from<std::string>(j, "method");
    if (j.contains("attributions")) p.attributions = scores_from(j["attributions"]);
    p.chart_caption = opt_from<std::string>(j, "chart_caption");
    p.served_at = j.at("served_at");
    return p;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("task payload: ") + e.what());
  }
}

// ---- study materialization ----------------------------------------------

namespace {

constexpr const char* kDefaultInstructions =
    "You will see a series of profiles. For each one, decide which outcome is correct. "
    "Depending on your group, an AI prediction and a chart explaining it may be shown.";

}  // namespace

StudyRecord materialize_study(const StudyConfig& config, const std::string& study_id, TimestampMs created_at) {
  config.validate();
  const tabular::Codebook codebook = tabular::load_codebook(config.codebook_path);
  if (codebook.dataset_name != config.dataset_name)
    throw ConflictError("codebook describes '" + codebook.dataset_name + "', config names '" + config.dataset_name +
                        "'");
  const models::TrainedModel model = models::load_checkpoint(config.checkpoint_path, codebook);
  const tabular::Encoder encoder = models::model_encoder(model, codebook);
  const auto& rec = model.record();
  const tabular::Dataset dataset =
      tabular::split_dataset(tabular::load_dataset(config.data_path, codebook), rec.test_fraction, rec.split_seed);
  const std::vector<tabular::Instance> pool = tabular::sample_study_pool(dataset, config.pool_size, config.pool_seed);

  StudyRecord r;
  r.study_id = study_id;
  r.config = config;
  r.config_fingerprint = config.fingerprint();
  r.model_fingerprint = model.fingerprint();
  r.codebook_hash = codebook.hash();
  r.label_name = codebook.label_name;
  r.positive_label_meaning = codebook.positive_label_meaning;
  r.negative_label_meaning = codebook.negative_label_meaning;
  r.created_at = created_at;

  std::optional<explainers::ExplanationSet> explanations;
  if (shows_explanation(config.condition)) {
    explanations = explainers::load_explanation_set(*config.explanations_path);
    if (explanations->model_fingerprint != model.fingerprint())
      throw ConflictError("explanation fingerprint mismatch: set was computed for model " +
                          explanations->model_fingerprint + ", checkpoint is " + model.fingerprint());
    if (explanations->codebook_hash != r.codebook_hash)
      throw ConflictError("explanation set was computed against a different codebook");
    const std::string method = *explanation_method(config.condition);
    if (explanations->method != method)
      throw ConflictError("condition " + to_string(config.condition) + " needs " + method + " explanations, set holds " +
                          explanations->method);
    r.explanation_fingerprint = explanations->config_fingerprint;
  }

  for (const auto& inst : pool) {
    PoolItem item;
    item.instance_id = inst.id;
    item.ground_truth = inst.label;
    const models::Prediction pred = model.predict(encoder.encode(inst));
    item.model_prediction = pred.label;
    item.model_probability = pred.probability;
    for (const auto& name : codebook.display_order) {
      const auto& spec = codebook.feature(name);
      item.features.push_back({name, spec.description, tabular::display_value(spec, inst.value(name))});
      if (spec.long_explanation) item.long_explanations.push_back({name, *spec.long_explanation});
    }
    for (const auto& pa : codebook.protected_attributes)
      item.attributes[pa.feature] = tabular::group_value(codebook.feature(pa.feature), inst.value(pa.feature));
    if (explanations) {
      const auto* er = explanations->find(inst.id);
      if (!er)
        throw ValidationError("missing_explanation", "explanation set has no record for pool instance " + inst.id);
      for (const auto& fs : er->feature_scores) item.attributions.push_back({fs.feature, fs.score});
      std::stable_sort(item.attributions.begin(), item.attributions.end(),
                       [](const ScoredFeature& a, const ScoredFeature& b) { return std::abs(a.score) > std::abs(b.score); });
    }
    r.pool.push_back(std::move(item));
  }

  r.survey = load_survey_bank(config.survey_bank_path);
  r.attention = load_attention_bank(config.attention_bank_path);
  r.consent_text = read_text_file(config.consent_text_path);
  r.instructions_text =
      config.instructions_text_path ? read_text_file(*config.instructions_text_path) : std::string(kDefaultInstructions);
  return r;
}

// ---- service -------------------------------------------------------------

struct StudyService::StudySlot {
  StudyRecord record;
};

struct StudyService::Slot {
  std::mutex mutex;
  Session session;
};

namespace {

constexpr const char* kStudies = "studies";
constexpr const char* kSessions = "sessions";

std::string session_id_for(const std::string& study_id, const std::string& participant_id) {
  return "sess-" + fingerprint(study_id + "/" + participant_id).substr(0, 16);
}

void require_phase(const Session& s, Phase expected) {
  if (s.phase != expected)
    throw StateError("wrong_phase", "session " + s.session_id + " is in phase " + to_string(s.phase) + ", expected " +
                                        to_string(expected));
}

}  // namespace

StudyService::StudyService(std::shared_ptr<DocumentStore> store, const Clock& clock)
    : store_(std::move(store)), clock_(clock) {
  load_all();
}

StudyService::~StudyService() = default;

void StudyService::load_all() {
  for (const auto& id : store_->list(kStudies)) {
    auto doc = store_->get(kStudies, id);
    if (!doc) continue;
    auto slot = std::make_unique<StudySlot>();
    slot->record = study_record_from_json(*doc);
    studies_[id] = std::move(slot);
  }
  for (const auto& id : store_->list(kSessions)) {
    auto doc = store_->get(kSessions, id);
    if (!doc) continue;
    auto slot = std::make_unique<Slot>();
    slot->session = session_from_json(*doc);
    by_participant_[{slot->session.study_id, slot->session.participant_id}] = id;
    sessions_[id] = std::move(slot);
  }
}

std::string StudyService::create_study(const StudyConfig& config) {
  std::lock_guard create_lock(create_mutex_);
  std::size_t seq;
  {
    std::lock_guard lock(registry_mutex_);
    seq = studies_.size();
  }
  std::string id;
  do {
    id = "study-" + fingerprint(config.fingerprint() + "#" + std::to_string(seq++)).substr(0, 12);
  } while (store_->get(kStudies, id));
  StudyRecord record = materialize_study(config, id, clock_.now_ms());
  store_->put(kStudies, id, to_json(record));
  auto slot = std::make_unique<StudySlot>();
  slot->record = std::move(record);
  std::lock_guard lock(registry_mutex_);
  studies_[id] = std::move(slot);
  return id;
}

const StudyService::StudySlot& StudyService::study_slot(const std::string& study_id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = studies_.find(study_id);
  if (it == studies_.end()) throw NotFoundError("unknown study '" + study_id + "'");
  return *it->second;
}

StudyRecord StudyService::study(const std::string& study_id) const { return study_slot(study_id).record; }

std::vector<std::string> StudyService::study_ids() const {
  std::lock_guard lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : studies_) ids.push_back(id);
  return ids;
}

StudyService::Slot& StudyService::slot(const std::string& session_id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return *it->second;
}

Session StudyService::open_session(const std::string& study_id, const std::string& participant_id) {
  if (participant_id.empty()) throw ValidationError("participant_id must not be empty");
  const StudyRecord& study = study_slot(study_id).record;
  std::lock_guard create_lock(create_mutex_);
  {
    std::lock_guard lock(registry_mutex_);
    auto it = by_participant_.find({study_id, participant_id});
    if (it != by_participant_.end())
      throw ConflictError("participant '" + participant_id + "' already has session " + it->second);
  }
  Session s;
  s.session_id = session_id_for(study_id, participant_id);
  s.study_id = study_id;
  s.participant_id = participant_id;
  s.condition = study.condition();
  s.phase = Phase::consent;
  const auto indices = tabular::draw_task_indices(study.pool.size(), study.config.tasks_per_participant,
                                                  derive_seed(study.config.pool_seed, participant_id));
  for (auto i : indices) s.task_list.push_back(study.pool[i].instance_id);
  s.created_at = s.updated_at = clock_.now_ms();
  store_->put(kSessions, s.session_id, to_json(s));

  auto slot = std::make_unique<Slot>();
  slot->session = s;
  std::lock_guard lock(registry_mutex_);
  by_participant_[{study_id, participant_id}] = s.session_id;
  sessions_[s.session_id] = std::move(slot);
  return s;
}

Session StudyService::open_session_round_robin(const std::vector<std::string>& study_ids,
                                               const std::string& participant_id) {
  if (study_ids.empty()) throw ValidationError("round robin needs at least one study");
  std::string chosen;
  std::size_t fewest = 0;
  {
    for (const auto& id : study_ids) study_slot(id);
    std::lock_guard lock(registry_mutex_);
    for (const auto& id : study_ids) {
      if (by_participant_.count({id, participant_id}))
        throw ConflictError("participant '" + participant_id + "' already has a session in " + id);
    }
    for (const auto& id : study_ids) {
      std::size_t n = 0;
      for (const auto& [key, _] : by_participant_)
        if (key.first == id) ++n;
      if (chosen.empty() || n < fewest) {
        chosen = id;
        fewest = n;
      }
    }
  }
  return open_session(chosen, participant_id);
}

Session StudyService::session(const std::string& session_id) const {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  return s.session;
}

std::optional<Session> StudyService::find_session(const std::string& study_id,
                                                  const std::string& participant_id) const {
  std::string id;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = by_participant_.find({study_id, participant_id});
    if (it == by_participant_.end()) return std::nullopt;
    id = it->second;
  }
  return session(id);
}

std::vector<Session> StudyService::sessions(const std::string& study_id) const {
  study_slot(study_id);
  std::vector<std::string> ids;
  {
    std::lock_guard lock(registry_mutex_);
    for (const auto& [key, id] : by_participant_)
      if (key.first == study_id) ids.push_back(id);
  }
  std::vector<Session> out;
  for (const auto& id : ids) out.push_back(session(id));
  return out;
}

Session StudyService::consent(const std::string& session_id, bool agree) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  require_phase(s.session, Phase::consent);
  if (!agree) throw ValidationError("consent_declined", "the study cannot start without consent");
  Session next = s.session;
  next.phase = Phase::instructions;
  next.updated_at = clock_.now_ms();
  store_->put(kSessions, session_id, to_json(next));
  s.session = next;
  return next;
}

Json StudyService::instructions(const std::string& session_id) const {
  const Session s = session(session_id);
  if (s.phase == Phase::consent)
    throw StateError("wrong_phase", "session " + session_id + " has not given consent yet");
  const StudyRecord& study = study_slot(s.study_id).record;
  return Json{{"session_id", session_id},
              {"phase", to_string(s.phase)},
              {"instructions", study.instructions_text},
              {"attention_check", study.attention.public_view()}};
}

AttentionResult StudyService::record_attention_check(const std::string& session_id,
                                                     const std::map<std::string, bool>& answers) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  require_phase(s.session, Phase::instructions);
  const StudyRecord& study = study_slot(s.session.study_id).record;
  const bool passed = study.attention.grade(answers);
  Session next = s.session;
  next.phase = passed ? Phase::tasks : Phase::disqualified;
  next.updated_at = clock_.now_ms();
  store_->put(kSessions, session_id, to_json(next));
  s.session = next;
  return {passed, next.phase};
}

TaskPayload StudyService::next_task(const std::string& session_id) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  require_phase(s.session, Phase::tasks);
  const StudyRecord& study = study_slot(s.session.study_id).record;
  if (s.session.task_cursor >= s.session.task_list.size())
    throw StateError("tasks_exhausted", "no tasks left in session " + session_id);

  Session next = s.session;
  const TimestampMs now = clock_.now_ms();
  // A re-serve restarts the timer; the earlier serve is discarded.
  next.served_at = study.config.timing == TimingMode::server ? now : next.virtual_now;
  next.updated_at = now;
  store_->put(kSessions, session_id, to_json(next));
  s.session = next;

  const PoolItem& item = study.item(next.task_list[next.task_cursor]);
  TaskPayload p;
  p.session_id = session_id;
  p.task_index = next.task_cursor;
  p.task_count = next.task_list.size();
  p.instance_id = item.instance_id;
  p.label_name = study.label_name;
  p.positive_label_meaning = study.positive_label_meaning;
  p.negative_label_meaning = study.negative_label_meaning;
  p.features = item.features;
  p.long_explanations = item.long_explanations;
  if (shows_prediction(next.condition)) p.ai_prediction = item.model_prediction;
  if (shows_explanation(next.condition)) {
    p.method = *explanation_method(next.condition);
    p.attributions = item.attributions;
    p.chart_caption = study.config.chart_caption;
  }
  p.served_at = *next.served_at;
  return p;
}

Session StudyService::submit_decision(const std::string& session_id, const std::string& instance_id,
                                      int human_decision, std::optional<std::int64_t> client_dwell_ms) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  require_phase(s.session, Phase::tasks);
  if (human_decision != 0 && human_decision != 1)
    throw ValidationError("bad_decision", "decision must be 0 or 1");
  if (client_dwell_ms && *client_dwell_ms < 0) throw ValidationError("bad_dwell", "dwell_ms must be non-negative");
  for (const auto& r : s.session.responses)
    if (r.instance_id == instance_id)
      throw ConflictError("duplicate submission for instance " + instance_id + " in session " + session_id);
  const std::string& current = s.session.task_list[s.session.task_cursor];
  if (instance_id != current)
    throw StateError("out_of_order", "instance " + instance_id + " is not the current task (" + current + ")");
  if (!s.session.served_at)
    throw StateError("not_served", "task " + instance_id + " has not been served yet");

  const StudyRecord& study = study_slot(s.session.study_id).record;
  const PoolItem& item = study.item(instance_id);
  const TimestampMs now = clock_.now_ms();

  TaskResponse r;
  r.instance_id = instance_id;
  r.human_decision = human_decision;
  if (shows_prediction(s.session.condition)) r.ai_prediction = item.model_prediction;
  r.ground_truth = item.ground_truth;
  r.served_at = *s.session.served_at;
  r.client_dwell_ms = client_dwell_ms;
  if (study.config.timing == TimingMode::server) {
    r.submitted_at = std::max(now, r.served_at);
  } else {
    if (!client_dwell_ms) throw ValidationError("missing_dwell", "this study records client-reported dwell_ms");
    r.submitted_at = r.served_at + *client_dwell_ms;
  }
  r.elapsed_ms = r.submitted_at - r.served_at;

  Session next = s.session;
  next.responses.push_back(r);
  next.task_cursor += 1;
  next.served_at.reset();
  next.virtual_now = r.submitted_at;
  next.updated_at = now;
  if (next.task_cursor == next.task_list.size()) next.phase = Phase::survey;
  store_->put(kSessions, session_id, to_json(next));
  s.session = next;
  return next;
}

Json StudyService::survey(const std::string& session_id) const {
  const Session s = session(session_id);
  if (s.phase != Phase::survey && s.phase != Phase::done)
    throw StateError("wrong_phase", "session " + session_id + " is in phase " + to_string(s.phase));
  const StudyRecord& study = study_slot(s.study_id).record;
  Json questions = Json::array();
  for (const auto& id : study.survey.visible_questions(s.condition))
    questions.push_back({{"id", id}, {"text", study.survey.question(id).text}});
  return Json{{"session_id", session_id},
              {"scale", study.survey.scale},
              {"questions", questions},
              {"demographics", study.survey.demographics}};
}

Session StudyService::submit_survey(const std::string& session_id, const std::map<std::string, int>& answers,
                                    const std::map<std::string, std::string>& demographics) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  require_phase(s.session, Phase::survey);
  const StudyRecord& study = study_slot(s.session.study_id).record;
  const auto visible = study.survey.visible_questions(s.session.condition);
  const std::set<std::string> expected(visible.begin(), visible.end());
  for (const auto& [id, value] : answers) {
    if (!expected.count(id))
      throw ValidationError("extra_question", "question " + id + " is not shown in condition " +
                                                  to_string(s.session.condition));
    if (value < 1 || value > 5)
      throw ValidationError("answer_range", "answer to " + id + " must be in 1..5, got " + std::to_string(value));
  }
  for (const auto& id : visible)
    if (!answers.count(id)) throw ValidationError("missing_question", "question " + id + " is unanswered");

  Session next = s.session;
  next.survey_answers = answers;
  next.demographics = demographics;
  next.phase = Phase::done;
  next.updated_at = clock_.now_ms();
  store_->put(kSessions, session_id, to_json(next));
  s.session = next;
  return next;
}

evaluation::ResponseSet StudyService::export_responses(const std::string& study_id) const {
  const StudyRecord& study = study_slot(study_id).record;
  std::vector<Session> all = sessions(study_id);
  std::sort(all.begin(), all.end(),
            [](const Session& a, const Session& b) { return a.participant_id < b.participant_id; });
  const std::string condition = to_string(study.condition());

  evaluation::ResponseSet out;
  for (const auto& s : all) {
    if (s.phase != Phase::done) {
      out.exclusions.push_back({study_id, s.session_id, s.participant_id, condition,
                                s.phase == Phase::disqualified ? "disqualified" : "incomplete:" + to_string(s.phase)});
      continue;
    }
    for (const auto& r : s.responses) {
      const PoolItem& item = study.item(r.instance_id);
      evaluation::DecisionRecord d;
      d.study = study_id;
      d.session = s.session_id;
      d.participant = s.participant_id;
      d.condition = condition;
      d.instance = r.instance_id;
      d.human_decision = r.human_decision;
      d.ai_prediction = r.ai_prediction;
      d.model_prediction = item.model_prediction;
      d.ground_truth = r.ground_truth;
      d.elapsed_ms = r.elapsed_ms;
      d.served_at = r.served_at;
      d.submitted_at = r.submitted_at;
      d.attributes = item.attributes;
      out.decisions.push_back(std::move(d));
    }
    for (const auto& q : study.survey.questions) {
      auto it = s.survey_answers.find(q.id);
      if (it != s.survey_answers.end())
        out.surveys.push_back({study_id, s.session_id, s.participant_id, condition, q.id, it->second});
    }
    if (!s.demographics.empty()) out.demographics.push_back({s.session_id, s.participant_id, s.demographics});
  }
  return out;
}

}  // namespace xaistudy::study
