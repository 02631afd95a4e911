#include "xaistudy/evaluation/records.hpp"

#include <filesystem>
#include <set>
#include <sstream>

#include "xaistudy/common/csv.hpp"
#include "xaistudy/common/error.hpp"

namespace xaistudy::evaluation {

namespace {

const std::vector<std::string> kDecisionColumns{
    "study",          "session",      "participant", "condition",  "instance",  "human_decision",
    "ai_prediction",  "model_prediction", "ground_truth", "elapsed_ms", "served_at", "submitted_at"};
const std::vector<std::string> kSurveyColumns{"study", "session", "participant", "condition", "question", "answer"};
const std::vector<std::string> kExclusionColumns{"study", "session", "participant", "condition", "reason"};
constexpr std::string_view kAttrPrefix = "attr:";

std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }

long long to_int(const std::string& s, const std::string& column, std::size_t row) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("row " + std::to_string(row) + ": column '" + column + "' is not an integer: '" + s + "'");
  }
}

int to_binary(const std::string& s, const std::string& column, std::size_t row) {
  const auto v = to_int(s, column, row);
  if (v != 0 && v != 1) throw SchemaError("row " + std::to_string(row) + ": column '" + column + "' must be 0 or 1");
  return static_cast<int>(v);
}

std::map<std::string, std::size_t> header_index(const csv::Row& header, const std::vector<std::string>& required) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
  for (const auto& c : required)
    if (!idx.count(c)) throw SchemaError("export is missing column '" + c + "'");
  return idx;
}

std::string rows_to_text(const std::vector<csv::Row>& rows) {
  std::ostringstream out;
  for (const auto& r : rows) csv::write_row(out, r);
  return out.str();
}

}  // namespace

std::string format_decisions_csv(const std::vector<DecisionRecord>& rows) {
  std::set<std::string> attr_names;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.attributes) attr_names.insert(k);
  std::vector<csv::Row> out;
  csv::Row header = kDecisionColumns;
  for (const auto& a : attr_names) header.push_back(std::string(kAttrPrefix) + a);
  out.push_back(header);
  for (const auto& r : rows) {
    csv::Row row{r.study,
                 r.session,
                 r.participant,
                 r.condition,
                 r.instance,
                 std::to_string(r.human_decision),
                 opt(r.ai_prediction),
                 opt(r.model_prediction),
                 std::to_string(r.ground_truth),
                 std::to_string(r.elapsed_ms),
                 std::to_string(r.served_at),
                 std::to_string(r.submitted_at)};
    for (const auto& a : attr_names) {
      auto it = r.attributes.find(a);
      row.push_back(it == r.attributes.end() ? "" : it->second);
    }
    out.push_back(std::move(row));
  }
  return rows_to_text(out);
}

std::vector<DecisionRecord> parse_decisions_csv(const std::string& text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("decision export is empty (no header)");
  const auto idx = header_index(rows[0], kDecisionColumns);
  std::vector<std::pair<std::string, std::size_t>> attrs;
  for (std::size_t i = 0; i < rows[0].size(); ++i)
    if (rows[0][i].rfind(kAttrPrefix, 0) == 0) attrs.emplace_back(rows[0][i].substr(kAttrPrefix.size()), i);

  std::vector<DecisionRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) throw SchemaError("decision export row " + std::to_string(r) + " has wrong width");
    auto col = [&](const char* name) -> const std::string& { return row[idx.at(name)]; };
    DecisionRecord d;
    d.study = col("study");
    d.session = col("session");
    d.participant = col("participant");
    d.condition = col("condition");
    d.instance = col("instance");
    d.human_decision = to_binary(col("human_decision"), "human_decision", r);
    if (!col("ai_prediction").empty()) d.ai_prediction = to_binary(col("ai_prediction"), "ai_prediction", r);
    if (!col("model_prediction").empty())
      d.model_prediction = to_binary(col("model_prediction"), "model_prediction", r);
    d.ground_truth = to_binary(col("ground_truth"), "ground_truth", r);
    d.elapsed_ms = to_int(col("elapsed_ms"), "elapsed_ms", r);
    d.served_at = to_int(col("served_at"), "served_at", r);
    d.submitted_at = to_int(col("submitted_at"), "submitted_at", r);
    for (const auto& [name, i] : attrs)
      if (!row[i].empty()) d.attributes[name] = row[i];
    out.push_back(std::move(d));
  }
  return out;
}

std::string format_survey_csv(const std::vector<SurveyRecord>& rows) {
  std::vector<csv::Row> out{kSurveyColumns};
  for (const auto& r : rows)
    out.push_back({r.study, r.session, r.participant, r.condition, r.question, std::to_string(r.answer)});
  return rows_to_text(out);
}

std::vector<SurveyRecord> parse_survey_csv(const std::string& text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("survey export is empty (no header)");
  const auto idx = header_index(rows[0], kSurveyColumns);
  std::vector<SurveyRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) throw SchemaError("survey export row " + std::to_string(r) + " has wrong width");
    out.push_back({row[idx.at("study")], row[idx.at("session")], row[idx.at("participant")],
                   row[idx.at("condition")], row[idx.at("question")],
                   static_cast<int>(to_int(row[idx.at("answer")], "answer", r))});
  }
  return out;
}

std::string format_exclusions_csv(const std::vector<Exclusion>& rows) {
  std::vector<csv::Row> out{kExclusionColumns};
  for (const auto& r : rows) out.push_back({r.study, r.session, r.participant, r.condition, r.reason});
  return rows_to_text(out);
}

std::vector<Exclusion> parse_exclusions_csv(const std::string& text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("exclusion export is empty (no header)");
  const auto idx = header_index(rows[0], kExclusionColumns);
  std::vector<Exclusion> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    out.push_back({row[idx.at("study")], row[idx.at("session")], row[idx.at("participant")],
                   row[idx.at("condition")], row[idx.at("reason")]});
  }
  return out;
}

Json to_json(const ResponseSet& set) {
  Json decisions = Json::array();
  for (const auto& d : set.decisions) {
    Json j{{"study", d.study},
           {"session", d.session},
           {"participant", d.participant},
           {"condition", d.condition},
           {"instance", d.instance},
           {"human_decision", d.human_decision},
           {"ai_prediction", d.ai_prediction ? Json(*d.ai_prediction) : Json(nullptr)},
           {"model_prediction", d.model_prediction ? Json(*d.model_prediction) : Json(nullptr)},
           {"ground_truth", d.ground_truth},
           {"elapsed_ms", d.elapsed_ms},
           {"served_at", d.served_at},
           {"submitted_at", d.submitted_at},
           {"attributes", d.attributes}};
    decisions.push_back(std::move(j));
  }
  Json surveys = Json::array();
  for (const auto& s : set.surveys)
    surveys.push_back({{"study", s.study},
                       {"session", s.session},
                       {"participant", s.participant},
                       {"condition", s.condition},
                       {"question", s.question},
                       {"answer", s.answer}});
  Json demo = Json::array();
  for (const auto& d : set.demographics)
    demo.push_back({{"session", d.session}, {"participant", d.participant}, {"fields", d.fields}});
  Json excl = Json::array();
  for (const auto& e : set.exclusions)
    excl.push_back({{"study", e.study},
                    {"session", e.session},
                    {"participant", e.participant},
                    {"condition", e.condition},
                    {"reason", e.reason}});
  return Json{{"decisions", decisions}, {"surveys", surveys}, {"demographics", demo}, {"exclusions", excl}};
}

ResponseSet response_set_from_json(const Json& doc) {
  ResponseSet set;
  auto opt_int = [](const Json& j) -> std::optional<int> {
    if (j.is_null()) return std::nullopt;
    return j.get<int>();
  };
  try {
    for (const auto& j : doc.at("decisions")) {
      DecisionRecord d;
      d.study = j.at("study");
      d.session = j.at("session");
      d.participant = j.at("participant");
      d.condition = j.at("condition");
      d.instance = j.at("instance");
      d.human_decision = j.at("human_decision");
      d.ai_prediction = opt_int(j.at("ai_prediction"));
      d.model_prediction = opt_int(j.at("model_prediction"));
      d.ground_truth = j.at("ground_truth");
      d.elapsed_ms = j.at("elapsed_ms");
      d.served_at = j.at("served_at");
      d.submitted_at = j.at("submitted_at");
      d.attributes = j.value("attributes", std::map<std::string, std::string>{});
      set.decisions.push_back(std::move(d));
    }
    for (const auto& j : doc.at("surveys"))
      set.surveys.push_back({j.at("study"), j.at("session"), j.at("participant"), j.at("condition"), j.at("question"),
                             j.at("answer")});
    for (const auto& j : doc.value("demographics", Json::array()))
      set.demographics.push_back({j.at("session"), j.at("participant"), j.at("fields")});
    for (const auto& j : doc.at("exclusions"))
      set.exclusions.push_back({j.at("study"), j.at("session"), j.at("participant"), j.at("condition"), j.at("reason")});
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("response set: ") + e.what());
  }
  return set;
}

void write_export_dir(const ResponseSet& set, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/decisions.csv", format_decisions_csv(set.decisions));
  write_text_file(dir + "/survey.csv", format_survey_csv(set.surveys));
  write_text_file(dir + "/exclusions.csv", format_exclusions_csv(set.exclusions));
}

ResponseSet read_export_dir(const std::string& dir) {
  ResponseSet set;
  set.decisions = parse_decisions_csv(read_text_file(dir + "/decisions.csv"));
  if (std::filesystem::exists(dir + "/survey.csv")) set.surveys = parse_survey_csv(read_text_file(dir + "/survey.csv"));
  if (std::filesystem::exists(dir + "/exclusions.csv"))
    set.exclusions = parse_exclusions_csv(read_text_file(dir + "/exclusions.csv"));
  return set;
}

}  // namespace xaistudy::evaluation
