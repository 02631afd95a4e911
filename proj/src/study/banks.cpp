#include "xaistudy/study/banks.hpp"

#include <algorithm>
#include <set>

#include "xaistudy/common/error.hpp"

namespace xaistudy::study {

bool SurveyQuestion::visible_in(Condition c) const {
  return std::find(hidden_in.begin(), hidden_in.end(), to_string(c)) == hidden_in.end();
}

std::vector<std::string> SurveyBank::visible_questions(Condition c) const {
  std::vector<std::string> out;
  for (const auto& q : questions)
    if (q.visible_in(c)) out.push_back(q.id);
  return out;
}

const SurveyQuestion& SurveyBank::question(const std::string& id) const {
  for (const auto& q : questions)
    if (q.id == id) return q;
  throw NotFoundError("unknown survey question '" + id + "'");
}

SurveyBank survey_bank_from_json(const Json& doc) {
  try {
    SurveyBank bank;
    bank.scale = doc.at("scale").get<std::vector<std::string>>();
    if (bank.scale.size() != 5) throw SchemaError("survey bank: scale needs five labels");
    std::set<std::string> seen;
    for (const auto& q : doc.at("questions")) {
      SurveyQuestion sq{q.at("id"), q.at("text"), q.value("hidden_in", std::vector<std::string>{})};
      for (const auto& c : sq.hidden_in) parse_condition(c);
      if (!seen.insert(sq.id).second) throw SchemaError("survey bank: duplicate question " + sq.id);
      bank.questions.push_back(std::move(sq));
    }
    bank.demographics = doc.value("demographics", std::vector<std::string>{});
    return bank;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("survey bank: ") + e.what());
  }
}

Json to_json(const SurveyBank& bank) {
  Json qs = Json::array();
  for (const auto& q : bank.questions) qs.push_back({{"id", q.id}, {"text", q.text}, {"hidden_in", q.hidden_in}});
  return Json{{"scale", bank.scale}, {"questions", qs}, {"demographics", bank.demographics}};
}

SurveyBank load_survey_bank(const std::string& path) { return survey_bank_from_json(read_json_file(path)); }

bool AttentionBank::grade(const std::map<std::string, bool>& answers) const {
  for (const auto& [id, _] : answers) {
    const bool known = std::any_of(items.begin(), items.end(), [&](const AttentionItem& i) { return i.id == id; });
    if (!known) throw ValidationError("unknown_item", "unknown attention item '" + id + "'");
  }
  for (const auto& item : items) {
    auto it = answers.find(item.id);
    if (it == answers.end()) throw ValidationError("missing_answer", "attention item '" + item.id + "' unanswered");
  }
  return std::all_of(items.begin(), items.end(), [&](const AttentionItem& i) { return answers.at(i.id) == i.answer; });
}

Json AttentionBank::public_view() const {
  Json out = Json::array();
  for (const auto& i : items) out.push_back({{"id", i.id}, {"text", i.text}});
  return out;
}

AttentionBank attention_bank_from_json(const Json& doc) {
  try {
    AttentionBank bank;
    for (const auto& i : doc.at("items")) bank.items.push_back({i.at("id"), i.at("text"), i.at("answer")});
    if (bank.items.empty()) throw SchemaError("attention bank: no items");
    return bank;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("attention bank: ") + e.what());
  }
}

Json to_json(const AttentionBank& bank) {
  Json items = Json::array();
  for (const auto& i : bank.items) items.push_back({{"id", i.id}, {"text", i.text}, {"answer", i.answer}});
  return Json{{"items", items}};
}

AttentionBank load_attention_bank(const std::string& path) {
  return attention_bank_from_json(read_json_file(path));
}

}  // namespace xaistudy::study
