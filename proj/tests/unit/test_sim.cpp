#include <cmath>

#include "doctest.h"
#include "workspace.hpp"
#include "xaistudy/common/clock.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/sim/behavior.hpp"
#include "xaistudy/sim/simulator.hpp"
#include "xaistudy/study/api.hpp"
#include "xaistudy/study/http.hpp"
#include "xaistudy/study/store.hpp"

using namespace xaistudy;
using namespace xaistudy::sim;

TEST_CASE("closed-form expectations partition every decision") {
  for (double b : {0.5, 0.7, 1.0})
    for (double p : {0.0, 0.3, 1.0})
      for (double a : {0.6, 0.9})
        for (bool shown : {true, false}) {
          BehaviorModel m;
          m.base_accuracy = b;
          m.adoption_prob = p;
          const auto e = expected_metrics(m, a, shown);
          CHECK(e.accuracy + e.over_reliance + e.under_reliance == doctest::Approx(1.0).epsilon(1e-12));
          if (!shown) CHECK(e.accuracy == doctest::Approx(b));
        }
}

TEST_CASE("simulated decisions follow the behavior model") {
  BehaviorModel m;
  m.base_accuracy = 0.6;
  m.adoption_prob = 0.7;
  m.task_seconds_mean = 0.3;
  m.task_seconds_sd = 0.5;
  study::TaskPayload shown;
  shown.ai_prediction = 1;
  study::TaskPayload hidden;
  Rng rng(12);
  const int n = 200000;
  long copy = 0, correct_hidden = 0;
  double min_ms = 1e9;
  for (int i = 0; i < n; ++i) {
    const auto d = simulate_decision(m, shown, 0, rng);
    copy += d.decision == 1;
    min_ms = std::min<double>(min_ms, static_cast<double>(d.elapsed_ms));
    correct_hidden += simulate_decision(m, hidden, 1, rng).decision == 1;
  }
  // Copy w.p. 0.7, otherwise correct (decision 0) w.p. 0.6.
  const double p_one = 0.7 + 0.3 * 0.4;
  CHECK(std::abs(copy / double(n) - p_one) <= 4 * std::sqrt(p_one * (1 - p_one) / n));
  CHECK(std::abs(correct_hidden / double(n) - 0.6) <= 4 * std::sqrt(0.24 / n));
  CHECK(min_ms >= kMinElapsedMs);
}

TEST_CASE("Likert policy weights") {
  BehaviorModel m;
  m.likert_policy["Q1"] = {0, 0, 1, 0, 0};
  m.likert_policy["Q2"] = {0, 0, 0, 1, 3};
  Rng rng(3);
  long fives = 0;
  for (int i = 0; i < 4000; ++i) {
    CHECK(simulate_likert(m, "Q1", rng) == 3);
    const int a = simulate_likert(m, "Q2", rng);
    CHECK(a >= 4);
    fives += a == 5;
  }
  CHECK(fives / 4000.0 == doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("behavior json round trip and validation") {
  BehaviorModel m;
  m.base_accuracy = 0.8;
  m.likert_policy["Q3"] = {1, 2, 3, 4, 5};
  m.seed = 99;
  const auto back = behavior_from_json(to_json(m));
  CHECK(back.base_accuracy == 0.8);
  CHECK(back.likert_policy == m.likert_policy);
  CHECK(back.seed == 99);
  m.adoption_prob = 1.5;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = BehaviorModel{};
  m.default_likert = {0, 0, 0, 0, 0};
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("simulated study through the API is independent of concurrency") {
  static xstest::Workspace ws("sim", 600);
  auto run = [&](unsigned concurrency, double attention, bool over_http) {
    ManualClock clock(1'000);
    study::StudyService svc(std::make_shared<study::MemoryStore>(), clock);
    study::ApiRouter router(svc);
    auto cfg = ws.config(Condition::FPE_GRAD, 100, 10);
    cfg.timing = study::TimingMode::client_dwell;
    const auto id = svc.create_study(cfg);
    BehaviorModel b;
    b.seed = 4;
    b.attention_accuracy = attention;
    const auto know = knowledge_from(ws.dataset, svc.study(id).attention);
    SimulationOptions opts;
    opts.concurrency = concurrency;
    if (!over_http) {
      study::InProcessClient client(router);
      return run_simulated_study(client, id, b, 8, know, opts);
    }
    study::HttpServer server(router);
    const int port = server.start("127.0.0.1", 0);
    auto result = run_simulated_study([port] { return std::make_unique<study::HttpClient>("127.0.0.1", port); }, id, b,
                                      8, know, opts);
    server.stop();
    return result;
  };
  const auto serial = run(1, 1.0, false);
  CHECK(serial.completed == 8);
  CHECK(serial.exported.decisions.size() == 80);
  CHECK(serial.exported.surveys.size() == 8 * 16);
  const auto parallel = run(4, 1.0, true);
  CHECK(parallel.exported == serial.exported);
  const auto careless = run(2, 0.0, false);
  CHECK(careless.disqualified == 8);
  CHECK(careless.exported.decisions.empty());
  CHECK(careless.exported.exclusions.size() == 8);
}
