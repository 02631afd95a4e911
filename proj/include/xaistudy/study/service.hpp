#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "xaistudy/common/clock.hpp"
#include "xaistudy/common/condition.hpp"
#include "xaistudy/evaluation/records.hpp"
#include "xaistudy/study/banks.hpp"
#include "xaistudy/study/config.hpp"
#include "xaistudy/study/store.hpp"

namespace xaistudy::study {

enum class Phase { consent, instructions, tasks, survey, done, disqualified };

std::string to_string(Phase p);
Phase parse_phase(const std::string& s);
bool is_terminal(Phase p);

struct FeatureRow {
  std::string name;
  std::string description;
  std::string value;  // human-readable
  bool operator==(const FeatureRow&) const = default;
};

struct LongExplanation {
  std::string feature;
  std::string text;
  bool operator==(const LongExplanation&) const = default;
};

struct ScoredFeature {
  std::string feature;
  double score = 0.0;
  bool operator==(const ScoredFeature&) const = default;
};

// Everything the server needs about one pool instance, frozen at study
// creation so a study never depends on files changing afterwards.
struct PoolItem {
  std::string instance_id;
  int ground_truth = 0;
  int model_prediction = 0;
  double model_probability = 0.0;
  std::vector<FeatureRow> features;  // display order
  std::vector<LongExplanation> long_explanations;
  std::map<std::string, std::string> attributes;  // protected attribute groups
  // Sorted by descending |score|, ties in codebook order. Empty unless the
  // condition shows explanations.
  std::vector<ScoredFeature> attributions;
  bool operator==(const PoolItem&) const = default;
};

struct StudyRecord {
  std::string study_id;
  StudyConfig config;
  std::string config_fingerprint;
  std::string model_fingerprint;
  std::string codebook_hash;
  std::optional<std::string> explanation_fingerprint;
  std::string label_name;
  std::string positive_label_meaning;
  std::string negative_label_meaning;
  std::vector<PoolItem> pool;
  SurveyBank survey;
  AttentionBank attention;
  std::string consent_text;
  std::string instructions_text;
  TimestampMs created_at = 0;

  Condition condition() const { return config.condition; }
  const PoolItem& item(const std::string& instance_id) const;
};

Json to_json(const StudyRecord& record);
StudyRecord study_record_from_json(const Json& doc);

struct TaskResponse {
  std::string instance_id;
  int human_decision = 0;
  std::optional<int> ai_prediction;
  int ground_truth = 0;
  std::int64_t elapsed_ms = 0;
  TimestampMs served_at = 0;
  TimestampMs submitted_at = 0;
  std::optional<std::int64_t> client_dwell_ms;
  bool operator==(const TaskResponse&) const = default;
};

struct Session {
  std::string session_id;
  std::string study_id;
  std::string participant_id;
  Condition condition = Condition::F;
  Phase phase = Phase::consent;
  std::vector<std::string> task_list;
  std::size_t task_cursor = 0;
  TimestampMs created_at = 0;
  TimestampMs updated_at = 0;
  std::optional<TimestampMs> served_at;  // serve time of the current task
  TimestampMs virtual_now = 0;           // client_dwell timeline
  std::vector<TaskResponse> responses;
  std::map<std::string, int> survey_answers;
  std::map<std::string, std::string> demographics;
  bool operator==(const Session&) const = default;
};

Json to_json(const Session& session);
Session session_from_json(const Json& doc);

struct TaskPayload {
  std::string session_id;
  std::size_t task_index = 0;
  std::size_t task_count = 0;
  std::string instance_id;
  std::string label_name;
  std::string positive_label_meaning;
  std::string negative_label_meaning;
  std::vector<FeatureRow> features;
  std::vector<LongExplanation> long_explanations;
  std::optional<int> ai_prediction;
  std::optional<std::string> method;
  std::vector<ScoredFeature> attributions;
  std::optional<std::string> chart_caption;
  TimestampMs served_at = 0;
};

Json to_json(const TaskPayload& payload);
TaskPayload task_payload_from_json(const Json& doc);

struct AttentionResult {
  bool passed = false;
  Phase phase = Phase::instructions;
};

// Orchestrates studies and sessions. State is written through to the store
// on every mutation; a new service over the same store resumes where the
// previous one stopped. Operations on one session are serialized; distinct
// sessions proceed in parallel.
class StudyService {
 public:
  StudyService(std::shared_ptr<DocumentStore> store, const Clock& clock);
  ~StudyService();
  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  std::string create_study(const StudyConfig& config);
  StudyRecord study(const std::string& study_id) const;
  std::vector<std::string> study_ids() const;

  Session open_session(const std::string& study_id, const std::string& participant_id);
  // Opens the session in whichever study has the fewest sessions (ties by
  // list order).
  Session open_session_round_robin(const std::vector<std::string>& study_ids, const std::string& participant_id);
  Session session(const std::string& session_id) const;
  std::optional<Session> find_session(const std::string& study_id, const std::string& participant_id) const;
  std::vector<Session> sessions(const std::string& study_id) const;

  Session consent(const std::string& session_id, bool agree);
  Json instructions(const std::string& session_id) const;
  AttentionResult record_attention_check(const std::string& session_id, const std::map<std::string, bool>& answers);
  TaskPayload next_task(const std::string& session_id);
  Session submit_decision(const std::string& session_id, const std::string& instance_id, int human_decision,
                          std::optional<std::int64_t> client_dwell_ms = std::nullopt);
  Json survey(const std::string& session_id) const;
  Session submit_survey(const std::string& session_id, const std::map<std::string, int>& answers,
                        const std::map<std::string, std::string>& demographics);

  evaluation::ResponseSet export_responses(const std::string& study_id) const;

 private:
  struct Slot;
  struct StudySlot;

  const StudySlot& study_slot(const std::string& study_id) const;
  Slot& slot(const std::string& session_id) const;
  void persist(Slot& slot);
  void load_all();

  std::shared_ptr<DocumentStore> store_;
  const Clock& clock_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<StudySlot>> studies_;
  std::map<std::string, std::unique_ptr<Slot>> sessions_;
  std::map<std::pair<std::string, std::string>, std::string> by_participant_;
  std::mutex create_mutex_;
};

// Builds the frozen record from the files a config references; exposed for
// tooling that wants to inspect a study without a service.
StudyRecord materialize_study(const StudyConfig& config, const std::string& study_id, TimestampMs created_at);

}  // namespace xaistudy::study
