#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "xaistudy/evaluation/records.hpp"
#include "xaistudy/sim/behavior.hpp"
#include "xaistudy/study/banks.hpp"
#include "xaistudy/study/http.hpp"
#include "xaistudy/tabular/dataset.hpp"

namespace xaistudy::sim {

// What a simulated participant knows beyond the API: the true labels (from
// the dataset file) and the attention-check answer key (from the bank file).
struct ParticipantKnowledge {
  std::map<std::string, int> ground_truth;
  std::map<std::string, bool> attention_key;
};

ParticipantKnowledge knowledge_from(const tabular::Dataset& dataset, const study::AttentionBank& bank);

struct SimulationOptions {
  std::string participant_prefix = "sim";
  unsigned concurrency = 1;
  std::map<std::string, std::string> demographics{{"source", "simulated"}};
};

struct SimulationSummary {
  std::size_t completed = 0;
  std::size_t disqualified = 0;
  evaluation::ResponseSet exported;
};

using ClientFactory = std::function<std::unique_ptr<study::ApiClient>()>;

// Runs n participants through consent, attention check, every task and the
// survey, using only API calls, then fetches the study export. Participant
// i is "<prefix>-<i>" and draws from a seed derived from (behavior.seed, id),
// so the export does not depend on concurrency.
SimulationSummary run_simulated_study(const ClientFactory& make_client, const std::string& study_id,
                                      const BehaviorModel& behavior, std::size_t n_participants,
                                      const ParticipantKnowledge& knowledge, const SimulationOptions& options = {});

SimulationSummary run_simulated_study(study::ApiClient& client, const std::string& study_id,
                                      const BehaviorModel& behavior, std::size_t n_participants,
                                      const ParticipantKnowledge& knowledge, const SimulationOptions& options = {});

}  // namespace xaistudy::sim
