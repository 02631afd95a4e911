#include "xaistudy/study/api.hpp"

#include <sstream>

#include "xaistudy/common/error.hpp"

namespace xaistudy::study {

namespace {

ApiResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, Json{{"error", code}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream in(path);
  std::string part;
  while (std::getline(in, part, '/'))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

std::map<std::string, std::string> parse_query(const std::string& q) {
  std::map<std::string, std::string> out;
  std::stringstream in(q);
  std::string pair;
  while (std::getline(in, pair, '&')) {
    if (pair.empty()) continue;
    const auto eq = pair.find('=');
    if (eq == std::string::npos) out[pair] = "";
    else out[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return out;
}

Json session_view(const Session& s, const StudyRecord& study) {
  Json j{{"session_id", s.session_id},
         {"study_id", s.study_id},
         {"participant_id", s.participant_id},
         {"condition", to_string(s.condition)},
         {"phase", to_string(s.phase)},
         {"task_cursor", s.task_cursor},
         {"task_count", s.task_list.size()}};
  if (s.phase == Phase::consent) j["consent_text"] = study.consent_text;
  return j;
}

Json study_view(const StudyRecord& r) {
  return Json{{"study_id", r.study_id},
              {"name", r.config.name},
              {"dataset", r.config.dataset_name},
              {"condition", to_string(r.condition())},
              {"pool_size", r.pool.size()},
              {"tasks_per_participant", r.config.tasks_per_participant},
              {"target_participants", r.config.target_participants},
              {"timing", to_string(r.config.timing)},
              {"config_fingerprint", r.config_fingerprint},
              {"model_fingerprint", r.model_fingerprint},
              {"codebook_hash", r.codebook_hash},
              {"explanation_fingerprint", r.explanation_fingerprint ? Json(*r.explanation_fingerprint) : Json()}};
}

std::string demographic_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

int status_for(const std::exception& e) {
  if (dynamic_cast<const NotFoundError*>(&e)) return 404;
  if (dynamic_cast<const ConflictError*>(&e) || dynamic_cast<const StateError*>(&e)) return 409;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const SchemaError*>(&e)) return 400;
  if (dynamic_cast<const Json::exception*>(&e)) return 400;
  return 500;
}

ApiResponse ApiRouter::handle(const std::string& method, const std::string& target, const std::string& body) const {
  const auto q = target.find('?');
  const std::string path = target.substr(0, q);
  const auto query = q == std::string::npos ? std::map<std::string, std::string>{} : parse_query(target.substr(q + 1));
  try {
    Json doc = body.empty() ? Json::object() : Json::parse(body);
    return dispatch(method, split_path(path), query, doc);
  } catch (const Json::parse_error& e) {
    return error_response(400, "bad_json", e.what());
  } catch (const Error& e) {
    return error_response(status_for(e), e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

ApiResponse ApiRouter::dispatch(const std::string& method, const std::vector<std::string>& p,
                                const std::map<std::string, std::string>& query, const Json& body) const {
  const bool get = method == "GET";
  const bool post = method == "POST";
  const std::size_t n = p.size();

  if (n >= 1 && p[0] == "studies") {
    if (n == 1 && post) {
      const StudyConfig config = body.contains("config_path")
                                     ? load_study_config(body["config_path"].get<std::string>())
                                     : study_config_from_json(body);
      const std::string id = service_.create_study(config);
      return json_response(201, study_view(service_.study(id)));
    }
    if (n == 1 && get) return json_response(200, Json{{"studies", service_.study_ids()}});
    if (n == 2 && get) return json_response(200, study_view(service_.study(p[1])));
    if (n == 3 && p[2] == "sessions" && post) {
      const std::string participant = body.at("participant_id");
      try {
        const Session s = service_.open_session(p[1], participant);
        return json_response(201, session_view(s, service_.study(p[1])));
      } catch (const ConflictError& e) {
        const auto existing = service_.find_session(p[1], participant);
        Json err{{"error", "existing_session"}, {"message", e.what()}};
        if (existing) err["session_id"] = existing->session_id;
        return json_response(409, err);
      }
    }
    if (n == 4 && p[2] == "participants" && get) {
      const auto s = service_.find_session(p[1], p[3]);
      if (!s) throw NotFoundError("participant '" + p[3] + "' has no session in " + p[1]);
      return json_response(200, session_view(*s, service_.study(p[1])));
    }
    if (n == 3 && p[2] == "export" && get) {
      const auto set = service_.export_responses(p[1]);
      auto fmt = query.find("format");
      if (fmt == query.end() || fmt->second == "json") return json_response(200, evaluation::to_json(set));
      if (fmt->second == "decisions.csv") return {200, "text/csv", evaluation::format_decisions_csv(set.decisions)};
      if (fmt->second == "survey.csv") return {200, "text/csv", evaluation::format_survey_csv(set.surveys)};
      if (fmt->second == "exclusions.csv") return {200, "text/csv", evaluation::format_exclusions_csv(set.exclusions)};
      throw ValidationError("unknown export format '" + fmt->second + "'");
    }
  }

  if (n >= 1 && p[0] == "sessions") {
    if (n == 1 && post) {
      const Session s = service_.open_session_round_robin(body.at("studies").get<std::vector<std::string>>(),
                                                          body.at("participant_id").get<std::string>());
      return json_response(201, session_view(s, service_.study(s.study_id)));
    }
    if (n == 2 && get) {
      const Session s = service_.session(p[1]);
      return json_response(200, session_view(s, service_.study(s.study_id)));
    }
    if (n == 3) {
      const std::string& id = p[1];
      const std::string& action = p[2];
      if (action == "consent" && post) {
        const Session s = service_.consent(id, body.value("agree", false));
        return json_response(200, session_view(s, service_.study(s.study_id)));
      }
      if (action == "instructions" && get) return json_response(200, service_.instructions(id));
      if (action == "attention-check" && post) {
        const auto answers = body.at("answers").get<std::map<std::string, bool>>();
        const AttentionResult r = service_.record_attention_check(id, answers);
        return json_response(200, Json{{"result", r.passed ? "pass" : "disqualified"}, {"phase", to_string(r.phase)}});
      }
      if (action == "next-task" && get) return json_response(200, to_json(service_.next_task(id)));
      if (action == "decision" && post) {
        std::optional<std::int64_t> dwell;
        if (body.contains("dwell_ms") && !body["dwell_ms"].is_null()) dwell = body["dwell_ms"].get<std::int64_t>();
        const Session s = service_.submit_decision(id, body.at("instance_id"), body.at("decision"), dwell);
        const auto& last = s.responses.back();
        return json_response(200, Json{{"accepted", true},
                                       {"instance_id", last.instance_id},
                                       {"elapsed_ms", last.elapsed_ms},
                                       {"task_cursor", s.task_cursor},
                                       {"phase", to_string(s.phase)}});
      }
      if (action == "survey" && get) return json_response(200, service_.survey(id));
      if (action == "survey" && post) {
        const auto answers = body.value("answers", Json::object()).get<std::map<std::string, int>>();
        std::map<std::string, std::string> demographics;
        const Json given = body.value("demographics", Json::object());
        for (const auto& [k, v] : given.items()) demographics[k] = demographic_text(v);
        const Session s = service_.submit_survey(id, answers, demographics);
        return json_response(200, Json{{"accepted", true}, {"phase", to_string(s.phase)}});
      }
    }
  }

  return error_response(404, "no_route", method + " /" + [&] {
    std::string joined;
    for (std::size_t i = 0; i < n; ++i) joined += (i ? "/" : "") + p[i];
    return joined;
  }());
}

}  // namespace xaistudy::study
