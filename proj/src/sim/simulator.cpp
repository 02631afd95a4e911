#include "xaistudy/sim/simulator.hpp"

#include <atomic>
#include <cstdio>
#include <thread>

#include "xaistudy/common/error.hpp"

namespace xaistudy::sim {

ParticipantKnowledge knowledge_from(const tabular::Dataset& dataset, const study::AttentionBank& bank) {
  ParticipantKnowledge k;
  for (const auto& inst : dataset.instances) k.ground_truth[inst.id] = inst.label;
  for (const auto& item : bank.items) k.attention_key[item.id] = item.answer;
  return k;
}

namespace {

std::string participant_name(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return prefix + "-" + buf;
}

class Participant {
 public:
  Participant(study::ApiClient& client, std::string participant_id, const BehaviorModel& behavior,
              const ParticipantKnowledge& knowledge, const SimulationOptions& options)
      : client_(client),
        id_(std::move(participant_id)),
        behavior_(behavior),
        knowledge_(knowledge),
        options_(options),
        rng_(derive_seed(behavior.seed, id_)) {}

  // True when the participant completed the study.
  bool run(const std::string& study_id) {
    const Json opened = call("POST", "/studies/" + study_id + "/sessions", {{"participant_id", id_}});
    session_ = opened.at("session_id");
    const std::string base = "/sessions/" + session_;
    call("POST", base + "/consent", {{"agree", true}});

    const Json instructions = call("GET", base + "/instructions", Json());
    Json answers = Json::object();
    for (const auto& item : instructions.at("attention_check")) {
      const std::string item_id = item.at("id");
      auto key = knowledge_.attention_key.find(item_id);
      if (key == knowledge_.attention_key.end())
        throw Error("simulation", context() + "no answer key for attention item " + item_id);
      const bool correct = rng_.bernoulli(behavior_.attention_accuracy);
      answers[item_id] = correct ? key->second : !key->second;
    }
    const Json verdict = call("POST", base + "/attention-check", {{"answers", answers}});
    if (verdict.at("result") != "pass") return false;

    std::string phase = "tasks";
    while (phase == "tasks") {
      const study::TaskPayload task = study::task_payload_from_json(call("GET", base + "/next-task", Json()));
      auto truth = knowledge_.ground_truth.find(task.instance_id);
      if (truth == knowledge_.ground_truth.end())
        throw Error("simulation", context() + "unknown instance " + task.instance_id);
      const SimulatedDecision d = simulate_decision(behavior_, task, truth->second, rng_);
      const Json ack = call("POST", base + "/decision",
                            {{"instance_id", task.instance_id}, {"decision", d.decision}, {"dwell_ms", d.elapsed_ms}});
      phase = ack.at("phase");
    }

    const Json survey = call("GET", base + "/survey", Json());
    Json likert = Json::object();
    for (const auto& q : survey.at("questions")) {
      const std::string qid = q.at("id");
      likert[qid] = simulate_likert(behavior_, qid, rng_);
    }
    call("POST", base + "/survey", {{"answers", likert}, {"demographics", options_.demographics}});
    return true;
  }

 private:
  std::string context() const {
    return "participant " + id_ + (session_.empty() ? "" : " session " + session_) + ": ";
  }

  Json call(const std::string& method, const std::string& target, const Json& body) {
    const study::ApiResponse r = client_.call(method, target, body);
    if (r.status >= 400)
      throw Error("simulation", context() + method + " " + target + " -> " + std::to_string(r.status) + " " + r.body);
    return r.json();
  }

  study::ApiClient& client_;
  std::string id_;
  const BehaviorModel& behavior_;
  const ParticipantKnowledge& knowledge_;
  const SimulationOptions& options_;
  Rng rng_;
  std::string session_;
};

}  // namespace

SimulationSummary run_simulated_study(const ClientFactory& make_client, const std::string& study_id,
                                      const BehaviorModel& behavior, std::size_t n_participants,
                                      const ParticipantKnowledge& knowledge, const SimulationOptions& options) {
  behavior.validate();
  std::vector<int> outcome(n_participants, 0);
  std::vector<std::string> failures(n_participants);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::unique_ptr<study::ApiClient> client = make_client();
    for (std::size_t i = next++; i < n_participants; i = next++) {
      try {
        Participant p(*client, participant_name(options.participant_prefix, i), behavior, knowledge, options);
        outcome[i] = p.run(study_id) ? 1 : 2;
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(options.concurrency, n_participants)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& f : failures)
    if (!f.empty()) throw Error("simulation", f);

  SimulationSummary summary;
  for (int o : outcome) {
    if (o == 1) ++summary.completed;
    if (o == 2) ++summary.disqualified;
  }
  auto client = make_client();
  const study::ApiResponse r = client->get("/studies/" + study_id + "/export");
  if (r.status != 200) throw Error("simulation", "export of " + study_id + " failed: " + r.body);
  summary.exported = evaluation::response_set_from_json(r.json());
  return summary;
}

namespace {

class BorrowedClient final : public study::ApiClient {
 public:
  explicit BorrowedClient(study::ApiClient& inner) : inner_(inner) {}
  study::ApiResponse call(const std::string& method, const std::string& target, const Json& body) override {
    return inner_.call(method, target, body);
  }

 private:
  study::ApiClient& inner_;
};

}  // namespace

SimulationSummary run_simulated_study(study::ApiClient& client, const std::string& study_id,
                                      const BehaviorModel& behavior, std::size_t n_participants,
                                      const ParticipantKnowledge& knowledge, const SimulationOptions& options) {
  SimulationOptions sequential = options;
  sequential.concurrency = 1;
  return run_simulated_study([&client] { return std::make_unique<BorrowedClient>(client); }, study_id, behavior,
                             n_participants, knowledge, sequential);
}

}  // namespace xaistudy::sim
