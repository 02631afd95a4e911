#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xaistudy/common/json_io.hpp"

namespace xaistudy::card {

enum class Phase { design, execution, analysis };

std::string to_string(Phase p);

struct ChecklistItem {
  Phase phase;
  std::string key;    // "1", "4a", ...
  std::string label;  // "1", "4 (a)", ...
  std::string prompt;
};

// The fixed checklist: design 1-7 (4 split into a and b), execution 1-2,
// analysis 1.
const std::vector<ChecklistItem>& checklist();

struct ItemAnswer {
  std::optional<std::string> answer;
  std::optional<std::string> not_applicable;  // reason
  // Design item 1 only.
  std::optional<bool> preregistered;
  std::string link;
  bool operator==(const ItemAnswer&) const = default;
};

struct ExtensionItem {
  std::string key;
  std::string prompt;
  ItemAnswer response;
  bool operator==(const ExtensionItem&) const = default;
};

// Optional sections beyond the core checklist, e.g. dataset_preparation,
// ui_design, survey_design.
struct ExtensionSection {
  std::string name;
  std::vector<ExtensionItem> items;
  bool operator==(const ExtensionSection&) const = default;
};

struct EvaluationCard {
  std::string title;
  std::string study_config_fingerprint;
  std::map<std::string, ItemAnswer> design;
  std::map<std::string, ItemAnswer> execution;
  std::map<std::string, ItemAnswer> analysis;
  std::vector<ExtensionSection> extensions;

  std::map<std::string, ItemAnswer>& phase(Phase p);
  const std::map<std::string, ItemAnswer>& phase(Phase p) const;
  bool operator==(const EvaluationCard&) const = default;
};

struct Issue {
  std::string item;  // "design/1", "analysis/1", "ui_design/2"
  std::string message;
  bool operator==(const Issue&) const = default;
};

std::vector<Issue> validate_card(const EvaluationCard& card);

// Throws SchemaError on malformed documents.
EvaluationCard card_from_json(const Json& doc);
Json to_json(const EvaluationCard& card);
EvaluationCard load_card(const std::string& path);
std::string card_fingerprint(const EvaluationCard& card);

// Plain-text document with phase headings and numbered answers. Refuses
// invalid cards. parse_rendered_card(render_card(c)) == c.
std::string render_card(const EvaluationCard& card);
EvaluationCard parse_rendered_card(const std::string& text);

}  // namespace xaistudy::card
