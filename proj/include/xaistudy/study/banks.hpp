#pragma once

#include <map>
#include <string>
#include <vector>

#include "xaistudy/common/condition.hpp"
#include "xaistudy/common/json_io.hpp"

namespace xaistudy::study {

struct SurveyQuestion {
  std::string id;
  std::string text;
  std::vector<std::string> hidden_in;  // condition names
  bool visible_in(Condition c) const;
  bool operator==(const SurveyQuestion&) const = default;
};

struct SurveyBank {
  std::vector<std::string> scale;  // labels for 1..5
  std::vector<SurveyQuestion> questions;
  std::vector<std::string> demographics;  // requested demographic fields

  std::vector<std::string> visible_questions(Condition c) const;
  const SurveyQuestion& question(const std::string& id) const;
  bool operator==(const SurveyBank&) const = default;
};

SurveyBank survey_bank_from_json(const Json& doc);
Json to_json(const SurveyBank& bank);
SurveyBank load_survey_bank(const std::string& path);

struct AttentionItem {
  std::string id;
  std::string text;
  bool answer = true;
  bool operator==(const AttentionItem&) const = default;
};

struct AttentionBank {
  std::vector<AttentionItem> items;

  // True iff every item is answered and matches. Unknown ids are rejected.
  bool grade(const std::map<std::string, bool>& answers) const;
  // Items without their answers, for the participant view.
  Json public_view() const;
  bool operator==(const AttentionBank&) const = default;
};

AttentionBank attention_bank_from_json(const Json& doc);
Json to_json(const AttentionBank& bank);
AttentionBank load_attention_bank(const std::string& path);

}  // namespace xaistudy::study
