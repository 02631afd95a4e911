#pragma once

#include <map>
#include <string>

#include "xaistudy/common/json_io.hpp"
#include "xaistudy/study/service.hpp"

namespace xaistudy::study {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  Json json() const { return Json::parse(body); }
};

// Transport-independent request handling. Routes:
//   POST /studies                              body: study config
//   GET  /studies
//   GET  /studies/{id}
//   POST /studies/{id}/sessions                body: {participant_id}
//   GET  /studies/{id}/participants/{pid}
//   GET  /studies/{id}/export[?format=decisions.csv|survey.csv|exclusions.csv]
//   POST /sessions                             body: {studies: [...], participant_id}
//   GET  /sessions/{id}
//   POST /sessions/{id}/consent                body: {agree}
//   GET  /sessions/{id}/instructions
//   POST /sessions/{id}/attention-check        body: {answers: {item: bool}}
//   GET  /sessions/{id}/next-task
//   POST /sessions/{id}/decision               body: {instance_id, decision[, dwell_ms]}
//   GET  /sessions/{id}/survey
//   POST /sessions/{id}/survey                 body: {answers: {qid: 1..5}, demographics: {...}}
// Errors are {"error": code, "message": text} with a 4xx status.
class ApiRouter {
 public:
  explicit ApiRouter(StudyService& service) : service_(service) {}

  // `target` may carry a query string.
  ApiResponse handle(const std::string& method, const std::string& target, const std::string& body) const;

 private:
  ApiResponse dispatch(const std::string& method, const std::vector<std::string>& parts,
                       const std::map<std::string, std::string>& query, const Json& body) const;

  StudyService& service_;
};

int status_for(const std::exception& e);

}  // namespace xaistudy::study
