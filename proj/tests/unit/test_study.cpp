#include <filesystem>
#include <set>

#include "doctest.h"
#include "workspace.hpp"
#include "xaistudy/common/clock.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/study/api.hpp"
#include "xaistudy/study/http.hpp"
#include "xaistudy/study/service.hpp"
#include "xaistudy/study/store.hpp"

using namespace xaistudy;
using namespace xaistudy::study;

namespace {

xstest::Workspace& shared_workspace() {
  static xstest::Workspace ws("study");
  return ws;
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::map<std::string, bool> correct_attention(const StudyRecord& r) {
  std::map<std::string, bool> out;
  for (const auto& item : r.attention.items) out[item.id] = item.answer;
  return out;
}

std::map<std::string, int> full_survey(const StudyRecord& r, Condition c, int value = 4) {
  std::map<std::string, int> out;
  for (const auto& id : r.survey.visible_questions(c)) out[id] = value;
  return out;
}

// Drives one participant to the end with a fixed per-task delay.
Session complete(StudyService& svc, ManualClock& clock, const std::string& study_id, const std::string& pid) {
  const StudyRecord rec = svc.study(study_id);
  Session s = svc.open_session(study_id, pid);
  svc.consent(s.session_id, true);
  svc.record_attention_check(s.session_id, correct_attention(rec));
  for (std::size_t i = 0; i < rec.config.tasks_per_participant; ++i) {
    const auto task = svc.next_task(s.session_id);
    clock.advance_ms(3000);
    svc.submit_decision(s.session_id, task.instance_id, task.ai_prediction.value_or(1));
  }
  return svc.submit_survey(s.session_id, full_survey(rec, rec.condition()), {{"age", "30"}});
}

}  // namespace

TEST_CASE("phase machine from consent to done with server timing") {
  auto& ws = shared_workspace();
  ManualClock clock(1'000'000);
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  const auto id = svc.create_study(ws.config(Condition::FP));
  const auto rec = svc.study(id);
  CHECK(rec.pool.size() == 200);

  Session s = svc.open_session(id, "p1");
  CHECK(s.phase == Phase::consent);
  CHECK(s.task_list.size() == 20);
  CHECK(error_code([&] { svc.next_task(s.session_id); }) == "wrong_phase");
  CHECK(error_code([&] { svc.consent(s.session_id, false); }) == "consent_declined");
  CHECK(svc.session(s.session_id).phase == Phase::consent);
  s = svc.consent(s.session_id, true);
  CHECK(s.phase == Phase::instructions);
  CHECK(svc.instructions(s.session_id).dump().find("attention") != std::string::npos);
  CHECK(svc.record_attention_check(s.session_id, correct_attention(rec)).phase == Phase::tasks);

  CHECK(error_code([&] { svc.submit_decision(s.session_id, s.task_list[0], 1); }) == "not_served");
  auto task = svc.next_task(s.session_id);
  CHECK(task.instance_id == s.task_list[0]);
  clock.advance_ms(5000);
  CHECK(error_code([&] { svc.submit_decision(s.session_id, s.task_list[1], 1); }) == "out_of_order");
  CHECK(error_code([&] { svc.submit_decision(s.session_id, task.instance_id, 2); }) == "bad_decision");
  s = svc.submit_decision(s.session_id, task.instance_id, 1);
  CHECK(s.responses[0].elapsed_ms == 5000);
  CHECK_THROWS_AS(svc.submit_decision(s.session_id, task.instance_id, 1), ConflictError);

  // Re-serving restarts the timer.
  svc.next_task(s.session_id);
  clock.advance_ms(9000);
  task = svc.next_task(s.session_id);
  clock.advance_ms(1500);
  s = svc.submit_decision(s.session_id, task.instance_id, 0);
  CHECK(s.responses[1].elapsed_ms == 1500);

  while (s.phase == Phase::tasks) {
    task = svc.next_task(s.session_id);
    s = svc.submit_decision(s.session_id, task.instance_id, 1);
  }
  CHECK(s.phase == Phase::survey);
  CHECK(s.responses.size() == 20);
  CHECK(error_code([&] { svc.next_task(s.session_id); }) == "wrong_phase");

  auto answers = full_survey(rec, Condition::FP);
  CHECK(answers.size() == 11);
  auto with_q4 = answers;
  with_q4["Q4"] = 3;
  CHECK(error_code([&] { svc.submit_survey(s.session_id, with_q4, {}); }) == "extra_question");
  auto out_of_range = answers;
  out_of_range["Q1"] = 6;
  CHECK(error_code([&] { svc.submit_survey(s.session_id, out_of_range, {}); }) == "answer_range");
  auto missing = answers;
  missing.erase("Q1");
  CHECK(error_code([&] { svc.submit_survey(s.session_id, missing, {}); }) == "missing_question");
  s = svc.submit_survey(s.session_id, answers, {{"age", "41"}});
  CHECK(s.phase == Phase::done);
  CHECK(is_terminal(s.phase));
}

TEST_CASE("failed attention check disqualifies") {
  auto& ws = shared_workspace();
  ManualClock clock;
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  const auto id = svc.create_study(ws.config(Condition::F));
  auto s = svc.open_session(id, "p");
  svc.consent(s.session_id, true);
  auto answers = correct_attention(svc.study(id));
  answers.begin()->second = !answers.begin()->second;
  const auto r = svc.record_attention_check(s.session_id, answers);
  CHECK_FALSE(r.passed);
  CHECK(r.phase == Phase::disqualified);
  CHECK(error_code([&] { svc.next_task(s.session_id); }) == "wrong_phase");
  auto s2 = svc.open_session(id, "q");
  svc.consent(s2.session_id, true);
  CHECK(error_code([&] { svc.record_attention_check(s2.session_id, {}); }) == "missing_answer");
}

TEST_CASE("condition contract: what each arm shows") {
  auto& ws = shared_workspace();
  ManualClock clock;
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  for (Condition c : kAllConditions) {
    CAPTURE(to_string(c));
    const auto id = svc.create_study(ws.config(c, 200, 20));
    const auto rec = svc.study(id);
    auto s = svc.open_session(id, "contract");
    svc.consent(s.session_id, true);
    svc.record_attention_check(s.session_id, correct_attention(rec));
    for (int i = 0; i < 20; ++i) {
      const auto t = svc.next_task(s.session_id);
      const auto& item = rec.item(t.instance_id);
      CHECK(t.ai_prediction.has_value() == shows_prediction(c));
      if (t.ai_prediction) CHECK(*t.ai_prediction == item.model_prediction);
      CHECK(t.method == explanation_method(c));
      CHECK(t.attributions.empty() == !shows_explanation(c));
      CHECK(t.chart_caption.has_value() == shows_explanation(c));
      CHECK(t.features.size() == ws.dataset.codebook.display_order.size());
      for (std::size_t k = 1; k < t.attributions.size(); ++k)
        CHECK(std::abs(t.attributions[k - 1].score) >= std::abs(t.attributions[k].score));
      const Json j = to_json(t);
      CHECK(j.contains("ai_prediction") == shows_prediction(c));
      svc.submit_decision(s.session_id, t.instance_id, 0);
    }
    const std::size_t visible = svc.survey(s.session_id)["questions"].size();
    CHECK(visible == (c == Condition::F ? 0u : c == Condition::FP ? 11u : 16u));
  }
}

TEST_CASE("participants draw distinct, reproducible task lists; duplicates conflict") {
  auto& ws = shared_workspace();
  ManualClock clock;
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  const auto id = svc.create_study(ws.config(Condition::FP));
  const auto a = svc.open_session(id, "alice");
  const auto b = svc.open_session(id, "bob");
  CHECK(a.task_list != b.task_list);
  CHECK(std::set<std::string>(a.task_list.begin(), a.task_list.end()).size() == 20);
  CHECK_THROWS_AS(svc.open_session(id, "alice"), ConflictError);
  StudyService other(std::make_shared<MemoryStore>(), clock);
  const auto id2 = other.create_study(ws.config(Condition::FP));
  CHECK(other.open_session(id2, "alice").task_list == a.task_list);
  CHECK_THROWS_AS(svc.session("sess-nope"), NotFoundError);
}

TEST_CASE("round robin fills the emptiest study") {
  auto& ws = shared_workspace();
  ManualClock clock;
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  const auto s1 = svc.create_study(ws.config(Condition::F));
  const auto s2 = svc.create_study(ws.config(Condition::FP));
  for (int i = 0; i < 6; ++i) svc.open_session_round_robin({s1, s2}, "rr" + std::to_string(i));
  CHECK(svc.sessions(s1).size() == 3);
  CHECK(svc.sessions(s2).size() == 3);
  CHECK_THROWS_AS(svc.open_session_round_robin({s1, s2}, "rr0"), ConflictError);
}

TEST_CASE("export: 30 completed and 2 disqualified participants") {
  auto& ws = shared_workspace();
  ManualClock clock(5'000'000);
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  const auto id = svc.create_study(ws.config(Condition::FPE_SHAP));
  for (int i = 0; i < 30; ++i) complete(svc, clock, id, "p" + std::to_string(100 + i));
  for (int i = 0; i < 2; ++i) {
    auto s = svc.open_session(id, "dq" + std::to_string(i));
    svc.consent(s.session_id, true);
    auto answers = correct_attention(svc.study(id));
    for (auto& [k, v] : answers) v = !v;
    svc.record_attention_check(s.session_id, answers);
  }
  svc.open_session(id, "zz-incomplete");
  const auto set = svc.export_responses(id);
  CHECK(set.decisions.size() == 600);
  CHECK(set.surveys.size() == 30 * 16);
  CHECK(set.demographics.size() == 30);
  REQUIRE(set.exclusions.size() == 3);
  CHECK(set.exclusions[0].reason == "disqualified");
  CHECK(set.exclusions[2].reason == "incomplete:consent");
  for (const auto& d : set.decisions) {
    CHECK(d.elapsed_ms == 3000);
    CHECK(d.ai_prediction == d.model_prediction);
    CHECK(d.attributes.count("group") == 1);
  }
  CHECK(svc.export_responses(id) == set);
}

TEST_CASE("client dwell timing") {
  auto& ws = shared_workspace();
  ManualClock clock(100);
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  auto cfg = ws.config(Condition::F);
  cfg.timing = TimingMode::client_dwell;
  const auto id = svc.create_study(cfg);
  auto s = svc.open_session(id, "d");
  svc.consent(s.session_id, true);
  svc.record_attention_check(s.session_id, correct_attention(svc.study(id)));
  auto t = svc.next_task(s.session_id);
  CHECK(error_code([&] { svc.submit_decision(s.session_id, t.instance_id, 1); }) == "missing_dwell");
  CHECK(error_code([&] { svc.submit_decision(s.session_id, t.instance_id, 1, -5); }) == "bad_dwell");
  s = svc.submit_decision(s.session_id, t.instance_id, 1, 4321);
  CHECK(s.responses[0].elapsed_ms == 4321);
  t = svc.next_task(s.session_id);
  CHECK(t.served_at == s.responses[0].submitted_at);
}

TEST_CASE("file store survives a restart mid-session") {
  auto& ws = shared_workspace();
  const auto dir = xstest::temp_dir("store");
  ManualClock clock(42);
  std::string id, sid, served;
  {
    StudyService svc(std::make_shared<FileStore>(dir.string()), clock);
    id = svc.create_study(ws.config(Condition::FPE_IG));
    auto s = svc.open_session(id, "crash");
    sid = s.session_id;
    svc.consent(sid, true);
    svc.record_attention_check(sid, correct_attention(svc.study(id)));
    for (int i = 0; i < 7; ++i) {
      const auto t = svc.next_task(sid);
      svc.submit_decision(sid, t.instance_id, 1);
    }
    served = svc.next_task(sid).instance_id;
  }
  StudyService svc(open_store("file:" + dir.string()), clock);
  CHECK(svc.study_ids() == std::vector<std::string>{id});
  auto s = svc.session(sid);
  CHECK(s.responses.size() == 7);
  CHECK(s.served_at.has_value());
  s = svc.submit_decision(sid, served, 0);
  CHECK(s.task_cursor == 8);
  while (s.phase == Phase::tasks) {
    const auto t = svc.next_task(sid);
    s = svc.submit_decision(sid, t.instance_id, 1);
  }
  CHECK(s.responses.size() == 20);
  const auto rec = svc.study(id);
  CHECK(study_record_from_json(to_json(rec)).pool == rec.pool);
  CHECK(session_from_json(to_json(s)) == s);
}

TEST_CASE("study creation checks explanation provenance") {
  auto& ws = shared_workspace();
  ManualClock clock;
  StudyService svc(std::make_shared<MemoryStore>(), clock);

  auto no_expl = ws.config(Condition::FPE_LIME);
  no_expl.explanations_path.reset();
  CHECK(error_code([&] { svc.create_study(no_expl); }) == "missing_explanations");
  auto f = ws.config(Condition::F);
  CHECK_FALSE(f.explanations_path.has_value());
  svc.create_study(f);

  auto wrong_method = ws.config(Condition::FPE_LIME);
  wrong_method.explanations_path = ws.explanations("kernel_shap");
  CHECK_THROWS_AS(svc.create_study(wrong_method), ConflictError);

  xstest::Workspace other("study-other", 400, 9);
  auto mismatch = ws.config(Condition::FPE_SG);
  mismatch.explanations_path = other.explanations("smoothgrad");
  CHECK_THROWS_AS(svc.create_study(mismatch), ConflictError);

  auto too_many = ws.config(Condition::F, 10, 20);
  CHECK_THROWS_AS(svc.create_study(too_many), ValidationError);
}

TEST_CASE("config json round trip keeps the fingerprint") {
  auto& ws = shared_workspace();
  const auto cfg = ws.config(Condition::FPE_SHAP);
  const auto path = (ws.root / "study.json").string();
  write_json_file(path, to_json(cfg));
  const auto back = load_study_config(path);
  CHECK(back.fingerprint() == cfg.fingerprint());
  CHECK(*back.explanations_path == *cfg.explanations_path);
}

TEST_CASE("HTTP API end to end over a live server") {
  auto& ws = shared_workspace();
  ManualClock clock(10'000);
  StudyService svc(std::make_shared<MemoryStore>(), clock);
  ApiRouter router(svc);
  HttpServer server(router);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  HttpClient client("127.0.0.1", port);

  auto cfg = ws.config(Condition::FP);
  cfg.timing = TimingMode::client_dwell;
  auto created = client.post("/studies", to_json(cfg));
  REQUIRE(created.status == 201);
  const std::string id = created.json()["study_id"];
  CHECK(client.get("/studies").json()["studies"].size() == 1);
  CHECK(client.get("/studies/nope").status == 404);

  auto opened = client.post("/studies/" + id + "/sessions", {{"participant_id", "h1"}});
  REQUIRE(opened.status == 201);
  const std::string sid = opened.json()["session_id"];
  auto again = client.post("/studies/" + id + "/sessions", {{"participant_id", "h1"}});
  CHECK(again.status == 409);
  CHECK(again.json()["error"] == "existing_session");
  CHECK(again.json()["session_id"] == sid);
  CHECK(client.get("/studies/" + id + "/participants/h1").json()["session_id"] == sid);
  CHECK(client.get("/sessions/" + sid).json().contains("consent_text"));

  CHECK(client.get("/sessions/" + sid + "/next-task").status == 409);
  CHECK(client.post("/sessions/" + sid + "/consent", {{"agree", false}}).status == 400);
  CHECK(client.post("/sessions/" + sid + "/consent", {{"agree", true}}).status == 200);
  CHECK(client.get("/sessions/" + sid + "/instructions").status == 200);
  Json answers = Json::object();
  for (const auto& [k, v] : correct_attention(svc.study(id))) answers[k] = v;
  auto att = client.post("/sessions/" + sid + "/attention-check", {{"answers", answers}});
  CHECK(att.json()["result"] == "pass");
  CHECK(att.json()["phase"] == "tasks");

  for (int i = 0; i < 20; ++i) {
    const Json task = client.get("/sessions/" + sid + "/next-task").json();
    CHECK(task.contains("ai_prediction"));
    CHECK_FALSE(task.contains("attributions"));
    const auto r = client.post("/sessions/" + sid + "/decision",
                               {{"instance_id", task["instance_id"]}, {"decision", 1}, {"dwell_ms", 2500}});
    REQUIRE(r.status == 200);
    CHECK(r.json()["elapsed_ms"] == 2500);
    if (i == 0) {
      const auto dup = client.post("/sessions/" + sid + "/decision",
                                   {{"instance_id", task["instance_id"]}, {"decision", 1}, {"dwell_ms", 1}});
      CHECK(dup.status == 409);
    }
  }
  const Json survey = client.get("/sessions/" + sid + "/survey").json();
  CHECK(survey["questions"].size() == 11);
  Json sa = Json::object();
  for (const auto& q : survey["questions"]) sa[q["id"].get<std::string>()] = 5;
  CHECK(client.post("/sessions/" + sid + "/survey", {{"answers", sa}, {"demographics", {{"age", 33}}}}).status == 200);
  CHECK(client.get("/sessions/" + sid).json()["phase"] == "done");

  const auto csv = client.get("/studies/" + id + "/export?format=decisions.csv");
  CHECK(csv.content_type.find("text/csv") != std::string::npos);
  CHECK(evaluation::parse_decisions_csv(csv.body).size() == 20);
  const auto exported = evaluation::response_set_from_json(client.get("/studies/" + id + "/export").json());
  CHECK(exported == svc.export_responses(id));
  CHECK(exported.demographics[0].fields.at("age") == "33");
  CHECK(client.get("/studies/" + id + "/export?format=xml").status == 400);
  CHECK(client.post("/sessions/" + sid + "/decision", Json::object()).status == 400);
  CHECK(client.call("POST", "/studies", Json("not an object")).status == 400);
  server.stop();
}
