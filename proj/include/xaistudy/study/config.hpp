#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "xaistudy/common/condition.hpp"
#include "xaistudy/common/json_io.hpp"

namespace xaistudy::study {

// server: elapsed time runs from serve to submit on the server clock.
// client_dwell: each session keeps a virtual timeline advanced by the
// client-reported dwell; used for replay and deterministic simulation.
enum class TimingMode { server, client_dwell };

std::string to_string(TimingMode m);
TimingMode parse_timing_mode(const std::string& s);

inline constexpr const char* kDefaultChartCaption =
    "The bar chart orders features by their absolute importance to the AI prediction. "
    "Bars to the right pushed the prediction toward the positive outcome; bars to the left pushed it "
    "toward the negative outcome.";

// Main configuration file. Paths are resolved against the directory of the
// file they were read from.
struct StudyConfig {
  std::string name;
  std::string dataset_name;
  std::string data_path;
  std::string codebook_path;
  std::string checkpoint_path;
  std::optional<std::string> explanations_path;
  Condition condition = Condition::F;
  std::uint64_t pool_seed = 0;
  std::size_t pool_size = 200;
  std::size_t tasks_per_participant = 20;
  std::string attention_bank_path;
  std::string survey_bank_path;
  std::string consent_text_path;
  std::optional<std::string> instructions_text_path;
  std::string chart_caption = kDefaultChartCaption;
  std::size_t target_participants = 30;
  TimingMode timing = TimingMode::server;

  void validate() const;
  std::string fingerprint() const;
};

Json to_json(const StudyConfig& config);
// `base_path` is the file the document came from; empty means paths are
// taken as given.
StudyConfig study_config_from_json(const Json& doc, const std::string& base_path = "");
StudyConfig load_study_config(const std::string& path);

}  // namespace xaistudy::study
