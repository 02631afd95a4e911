#include "xaistudy/card/card.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/hash.hpp"

namespace xaistudy::card {

std::string to_string(Phase p) {
  switch (p) {
    case Phase::design: return "design";
    case Phase::execution: return "execution";
    case Phase::analysis: return "analysis";
  }
  return "design";
}

const std::vector<ChecklistItem>& checklist() {
  static const std::vector<ChecklistItem> items{
      {Phase::design, "1", "1", "Is the study pre-registered? If so, what is the link to the pre-registration?"},
      {Phase::design, "2", "2", "What is the budget for this study?"},
      {Phase::design, "3", "3", "How are the decision making tasks/datasets chosen?"},
      {Phase::design, "4a", "4 (a)", "What is the target population? What are the exact inclusion criteria for the study?"},
      {Phase::design, "4b", "4 (b)",
       "What is the target population? Does the study focus on experts in a given domain or lay people?"},
      {Phase::design, "5", "5", "Is there an attention check for the study?"},
      {Phase::design, "6", "6",
       "What efforts have been made to help the user understand the semantic meaning of the task and data?"},
      {Phase::design, "7", "7",
       "What are major design considerations for the user interface? What are alternative design choices that are "
       "not used?"},
      {Phase::execution, "1", "1", "Is there a pilot study? What adjustments are made after pilot study?"},
      {Phase::execution, "2", "2", "What is the compensation rate for the participants?"},
      {Phase::analysis, "1", "1",
       "Are there any participants excluded from the analysis? What are the exclusion criteria?"},
  };
  return items;
}

std::map<std::string, ItemAnswer>& EvaluationCard::phase(Phase p) {
  return p == Phase::design ? design : p == Phase::execution ? execution : analysis;
}

const std::map<std::string, ItemAnswer>& EvaluationCard::phase(Phase p) const {
  return p == Phase::design ? design : p == Phase::execution ? execution : analysis;
}

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void check_answer(const ItemAnswer& a, const std::string& where, bool preregistration, std::vector<Issue>& out) {
  if (a.answer && a.not_applicable) {
    out.push_back({where, "both answered and marked not applicable"});
  } else if (a.not_applicable) {
    if (blank(*a.not_applicable)) out.push_back({where, "not-applicable needs a reason"});
  } else if (!a.answer || blank(*a.answer)) {
    out.push_back({where, "unanswered"});
  } else if (preregistration && a.preregistered.value_or(false) && blank(a.link)) {
    out.push_back({where, "pre-registered studies must give the pre-registration link"});
  }
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

}  // namespace

std::vector<Issue> validate_card(const EvaluationCard& card) {
  std::vector<Issue> issues;
  for (const auto& item : checklist()) {
    const std::string where = to_string(item.phase) + "/" + item.key;
    const auto& answers = card.phase(item.phase);
    auto it = answers.find(item.key);
    if (it == answers.end()) {
      issues.push_back({where, "unanswered"});
      continue;
    }
    check_answer(it->second, where, item.phase == Phase::design && item.key == "1", issues);
  }
  for (Phase p : {Phase::design, Phase::execution, Phase::analysis}) {
    for (const auto& [key, _] : card.phase(p)) {
      const bool known = std::any_of(checklist().begin(), checklist().end(),
                                     [&](const ChecklistItem& i) { return i.phase == p && i.key == key; });
      if (!known) issues.push_back({to_string(p) + "/" + key, "not a checklist item"});
    }
  }
  std::set<std::string> sections;
  for (const auto& section : card.extensions) {
    if (!valid_key(section.name) || !sections.insert(section.name).second)
      issues.push_back({section.name, "extension sections need a unique alphanumeric name"});
    std::set<std::string> keys;
    for (const auto& item : section.items) {
      const std::string where = section.name + "/" + item.key;
      if (!valid_key(item.key) || !keys.insert(item.key).second) {
        issues.push_back({where, "extension items need a unique alphanumeric key"});
        continue;
      }
      if (blank(item.prompt)) issues.push_back({where, "extension item has no prompt"});
      check_answer(item.response, where, false, issues);
    }
  }
  return issues;
}

// ---- JSON ------------------------------------------------------------------

namespace {

Json answer_json(const ItemAnswer& a) {
  Json j = Json::object();
  if (a.answer) j["answer"] = *a.answer;
  if (a.not_applicable) j["not_applicable"] = *a.not_applicable;
  if (a.preregistered) j["preregistered"] = *a.preregistered;
  if (!a.link.empty()) j["link"] = a.link;
  return j;
}

ItemAnswer answer_from(const Json& j) {
  if (!j.is_object()) throw SchemaError("card: item answers must be objects");
  ItemAnswer a;
  if (j.contains("answer")) a.answer = j["answer"].get<std::string>();
  if (j.contains("not_applicable")) a.not_applicable = j["not_applicable"].get<std::string>();
  if (j.contains("preregistered")) a.preregistered = j["preregistered"].get<bool>();
  a.link = j.value("link", "");
  return a;
}

}  // namespace

Json to_json(const EvaluationCard& c) {
  Json j{{"title", c.title}, {"study_config_fingerprint", c.study_config_fingerprint}};
  for (Phase p : {Phase::design, Phase::execution, Phase::analysis}) {
    Json items = Json::object();
    for (const auto& [k, a] : c.phase(p)) items[k] = answer_json(a);
    j[to_string(p)] = items;
  }
  Json ext = Json::array();
  for (const auto& s : c.extensions) {
    Json items = Json::array();
    for (const auto& i : s.items) {
      Json item = answer_json(i.response);
      item["key"] = i.key;
      item["prompt"] = i.prompt;
      items.push_back(item);
    }
    ext.push_back({{"name", s.name}, {"items", items}});
  }
  j["extensions"] = ext;
  return j;
}

EvaluationCard card_from_json(const Json& doc) {
  try {
    if (!doc.is_object()) throw SchemaError("card: document must be an object");
    EvaluationCard c;
    c.title = doc.value("title", "");
    c.study_config_fingerprint = doc.value("study_config_fingerprint", "");
    for (Phase p : {Phase::design, Phase::execution, Phase::analysis}) {
      if (!doc.contains(to_string(p))) continue;
      for (const auto& [k, v] : doc[to_string(p)].items()) c.phase(p)[k] = answer_from(v);
    }
    for (const auto& s : doc.value("extensions", Json::array())) {
      ExtensionSection section{s.at("name"), {}};
      for (const auto& i : s.at("items")) section.items.push_back({i.at("key"), i.value("prompt", ""), answer_from(i)});
      c.extensions.push_back(std::move(section));
    }
    return c;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("card: ") + e.what());
  }
}

EvaluationCard load_card(const std::string& path) { return card_from_json(read_json_file(path)); }

std::string card_fingerprint(const EvaluationCard& card) { return fingerprint(to_json(card).dump()); }

// ---- text rendering ----------------------------------------------------------

namespace {

constexpr const char* kHeader = "Evaluation card";
constexpr const char* kIndent = "   ";

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '\\') out += "\\\\";
    else if (ch == '\n') out += "\\n";
    else if (ch == '\r') out += "\\r";
    else out += ch;
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw SchemaError("card text: dangling escape");
    if (s[i] == '\\') out += '\\';
    else if (s[i] == 'n') out += '\n';
    else if (s[i] == 'r') out += '\r';
    else throw SchemaError(std::string("card text: unknown escape \\") + s[i]);
  }
  return out;
}

std::string heading(Phase p) {
  switch (p) {
    case Phase::design: return "Design phase:";
    case Phase::execution: return "Execution phase:";
    case Phase::analysis: return "Analysis phase:";
  }
  return "";
}

void render_answer(std::ostringstream& out, const ItemAnswer& a) {
  if (a.answer) out << kIndent << "answer: " << escape(*a.answer) << "\n";
  if (a.not_applicable) out << kIndent << "not_applicable: " << escape(*a.not_applicable) << "\n";
  if (a.preregistered) out << kIndent << "preregistered: " << (*a.preregistered ? "yes" : "no") << "\n";
  if (!a.link.empty()) out << kIndent << "link: " << escape(a.link) << "\n";
}

}  // namespace

std::string render_card(const EvaluationCard& card) {
  const auto issues = validate_card(card);
  if (!issues.empty())
    throw ValidationError("invalid_card", "cannot render an invalid card (" + issues.front().item + ": " +
                                              issues.front().message + ")");
  std::ostringstream out;
  out << kHeader << "\n";
  out << "title: " << escape(card.title) << "\n";
  out << "study_config_fingerprint: " << escape(card.study_config_fingerprint) << "\n";
  for (Phase p : {Phase::design, Phase::execution, Phase::analysis}) {
    out << "\n" << heading(p) << "\n";
    for (const auto& item : checklist()) {
      if (item.phase != p) continue;
      out << "\n" << item.label << ". " << item.prompt << "\n";
      render_answer(out, card.phase(p).at(item.key));
    }
  }
  for (const auto& s : card.extensions) {
    out << "\nExtension " << s.name << ":\n";
    for (const auto& i : s.items) {
      out << "\n" << i.key << ". " << escape(i.prompt) << "\n";
      render_answer(out, i.response);
    }
  }
  return out.str();
}

EvaluationCard parse_rendered_card(const std::string& text) {
  static const std::regex core_item(R"(^(\d+)(?: \(([a-z])\))?\. .*$)");
  static const std::regex ext_item(R"(^([A-Za-z0-9_]+)\. (.*)$)");
  static const std::regex field(R"(^   ([a-z_]+): (.*)$)");
  static const std::regex ext_heading(R"(^Extension ([A-Za-z0-9_]+):$)");

  EvaluationCard card;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw SchemaError("card text: missing header");

  bool in_phase = false;
  Phase phase = Phase::design;
  ExtensionSection* section = nullptr;
  ItemAnswer* current = nullptr;
  std::size_t lineno = 1;
  std::smatch m;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      return SchemaError("card text line " + std::to_string(lineno) + ": " + why);
    };
    if (std::regex_match(line, m, field)) {
      const std::string key = m[1], value = m[2];
      if (!current) {
        if (key == "title") card.title = unescape(value);
        else if (key == "study_config_fingerprint") card.study_config_fingerprint = unescape(value);
        else throw fail("unexpected field " + key);
        continue;
      }
      if (key == "answer") current->answer = unescape(value);
      else if (key == "not_applicable") current->not_applicable = unescape(value);
      else if (key == "preregistered") {
        if (value != "yes" && value != "no") throw fail("preregistered must be yes or no");
        current->preregistered = value == "yes";
      } else if (key == "link") current->link = unescape(value);
      else throw fail("unknown field " + key);
      continue;
    }
    if (!in_phase && !section && line.rfind("title: ", 0) == 0) {
      card.title = unescape(line.substr(7));
      continue;
    }
    if (!in_phase && !section && line.rfind("study_config_fingerprint: ", 0) == 0) {
      card.study_config_fingerprint = unescape(line.substr(26));
      continue;
    }
    bool is_heading = false;
    for (Phase p : {Phase::design, Phase::execution, Phase::analysis}) {
      if (line == heading(p)) {
        phase = p;
        in_phase = true;
        section = nullptr;
        current = nullptr;
        is_heading = true;
      }
    }
    if (is_heading) continue;
    if (std::regex_match(line, m, ext_heading)) {
      card.extensions.push_back({m[1], {}});
      section = &card.extensions.back();
      in_phase = false;
      current = nullptr;
      continue;
    }
    if (section && std::regex_match(line, m, ext_item)) {
      section->items.push_back({m[1], unescape(m[2]), {}});
      current = &section->items.back().response;
      continue;
    }
    if (in_phase && std::regex_match(line, m, core_item)) {
      const std::string key = std::string(m[1]) + std::string(m[2]);
      current = &card.phase(phase)[key];
      continue;
    }
    throw fail("unrecognized line");
  }
  return card;
}

}  // namespace xaistudy::card
