#include <thread>

#include <gtest/gtest.h>

#include "inquire/http_server.hpp"
#include "support.hpp"

using namespace inquire;
using testing_support::ScriptedProvider;
using testing_support::TempDir;

namespace {

// A doctor that never becomes confident: every differential is flat over
// the same five diseases.
ScriptedProvider flat_provider() {
  ScriptedProvider p;
  p.handlers[prompts::PromptRole::DoctorDifferential] = [](const PromptRequest&) {
    return std::string(R"([{"disease": "Acute pericarditis", "confidence": 0.5},
      {"disease": "Myocardial infarction", "confidence": 0.5}, {"disease": "Pulmonary embolism", "confidence": 0.5},
      {"disease": "Pneumothorax", "confidence": 0.5}, {"disease": "Costochondritis", "confidence": 0.5}])");
  };
  p.handlers[prompts::PromptRole::DoctorDiscriminatory] = [](const PromptRequest& r) {
    return "Response: Discriminatory " + std::to_string(r.text.size() % 97) + "?";
  };
  p.handlers[prompts::PromptRole::DoctorExploratory] = [](const PromptRequest&) { return std::string("Response: Anything else?"); };
  p.handlers[prompts::PromptRole::DoctorNaive] = [](const PromptRequest&) { return std::string("Response: Any fever?"); };
  p.handlers[prompts::PromptRole::Update] = [](const PromptRequest& r) {
    auto a = r.text.rfind(" A: ");
    return "The patient said " + r.text.substr(a + 4, r.text.size() - a - 6) + ".";
  };
  p.handlers[prompts::PromptRole::Evaluator] = [](const PromptRequest& r) {
    return std::string(text::lower(r.text).find("diagnosis to evaluate: acute pericarditis") != std::string::npos ? "true"
                                                                                                             : "false");
  };
  return p;
}

struct Service {
  ScriptedProvider provider = flat_provider();
  icd::IcdIndex index = icd::load_index(testing_support::source_path("data/icd/icd_index.json"));
  icd::SimilarityMatrix matrix = icd::SimilarityMatrix::with_default_chapters();
  std::unique_ptr<SessionService> svc;

  explicit Service(ServiceConfig cfg = {}) {
    svc = std::make_unique<SessionService>(provider, index, matrix, cfg,
                                           std::vector<CaseRecord>{testing_support::fixture_case()});
  }

  ApiResponse post(const std::string& path, const nlohmann::json& body) { return svc->handle("POST", path, body.dump()); }
  ApiResponse get(const std::string& path) { return svc->handle("GET", path, ""); }
};

nlohmann::json fixture_case_json() {
  return nlohmann::json::parse(testing_support::slurp(testing_support::source_path("data/cases/chest_pain.json")));
}

}  // namespace

TEST(Session, Health) {
  Service s;
  auto r = s.get("/v1/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("status"), "ok");
  EXPECT_EQ(s.svc->handle("POST", "/v1/health", "").status, 405);
}

TEST(Session, CreateReturnsQuestionAndScores) {
  Service s;
  auto r = s.post("/v1/sessions", {{"case", fixture_case_json().at("Patient_Case")}, {"mask", "lab"}});
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body.at("status"), "awaiting_answer");
  EXPECT_TRUE(r.body.at("question").is_object());
  ASSERT_EQ(r.body.at("scores").size(), 5u);
  int selected = 0;
  for (const auto& row : r.body.at("scores")) {
    for (auto key : {"ig", "div", "con", "total", "text", "kind"}) EXPECT_TRUE(row.contains(key)) << key;
    selected += row.at("selected").get<bool>() ? 1 : 0;
  }
  EXPECT_EQ(selected, 1);
  EXPECT_EQ(r.body.at("belief_history").size(), 1u);
  EXPECT_EQ(r.body.at("entropy_history").size(), 1u);
  EXPECT_EQ(r.body.at("turn"), 0);
  EXPECT_EQ(r.body.at("mask"), "lab");
  EXPECT_EQ(r.body.at("id").get<std::string>().size(), 32u);

  auto g = s.get("/v1/sessions/" + r.body.at("id").get<std::string>());
  EXPECT_EQ(g.status, 200);
  EXPECT_EQ(g.body, r.body);
}

TEST(Session, CreateErrors) {
  Service s;
  EXPECT_EQ(s.svc->handle("POST", "/v1/sessions", "{oops").status, 400);
  EXPECT_EQ(s.svc->handle("POST", "/v1/sessions", "[1]").status, 400);
  EXPECT_EQ(s.post("/v1/sessions", {{"case", {{"Patient_Information", {{"Demographics", "x"}}}}}}).status, 400);
  EXPECT_EQ(s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}, {"mode", "telepathy"}}).status, 422);
  EXPECT_EQ(s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}, {"mask", "everything"}}).status, 422);
  EXPECT_EQ(s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}, {"config", {{"temperature", -1}}}}).status, 422);
  auto missing = s.post("/v1/sessions", {{"case_id", "no-such-case"}});
  EXPECT_EQ(missing.status, 404);
  EXPECT_EQ(missing.body.at("code"), "unknown_case");
  EXPECT_EQ(s.svc->session_count(), 0u);
}

TEST(Session, TenthAnswerTerminatesAtMaxTurns) {
  TempDir dir("session_max");
  ServiceConfig cfg;
  cfg.transcript_path = (dir.path / "sessions.jsonl").string();
  Service s(cfg);
  auto r = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}});
  ASSERT_EQ(r.status, 201);
  auto id = r.body.at("id").get<std::string>();
  for (int i = 1; i <= 10; ++i) {
    EXPECT_EQ(r.body.at("status"), "awaiting_answer") << i;
    r = s.post("/v1/sessions/" + id + "/answer", {{"answer", "No, not that I know of #" + std::to_string(i)}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body.at("turn"), i);
  }
  EXPECT_EQ(r.body.at("status"), "terminated");
  EXPECT_EQ(r.body.at("termination"), "max_turns");
  EXPECT_EQ(r.body.at("belief").size(), 5u);
  EXPECT_EQ(r.body.at("belief_history").size(), 11u);
  EXPECT_EQ(r.body.at("transcript").at("turns").size(), 10u);
  auto late = s.post("/v1/sessions/" + id + "/answer", {{"answer", "hello"}});
  EXPECT_EQ(late.status, 409);
  EXPECT_EQ(late.body.at("code"), "no_pending_question");
  auto saved = read_transcripts(cfg.transcript_path);
  ASSERT_EQ(saved.size(), 1u);
  EXPECT_EQ(saved[0].termination, Termination::MaxTurns);
  EXPECT_EQ(saved[0].turns.size(), 10u);
  EXPECT_EQ(saved[0].correct_rank, 1);
}

TEST(Session, AnswerValidation) {
  Service s;
  auto id = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}}).body.at("id").get<std::string>();
  EXPECT_EQ(s.post("/v1/sessions/" + id + "/answer", {{"answer", "   "}}).status, 400);
  EXPECT_EQ(s.svc->handle("POST", "/v1/sessions/" + id + "/answer", "not json").status, 400);
  EXPECT_EQ(s.post("/v1/sessions/" + id + "/answer", {{"reply", "x"}}).status, 400);
  EXPECT_EQ(s.post("/v1/sessions/deadbeef/answer", {{"answer", "x"}}).status, 404);
  EXPECT_EQ(s.svc->handle("GET", "/v1/sessions/" + id + "/answer", "").status, 405);
  EXPECT_EQ(s.svc->handle("DELETE", "/v1/sessions/" + id, "").status, 405);
  EXPECT_EQ(s.get("/v1/nowhere").status, 404);
  EXPECT_EQ(s.get("/v1/sessions/" + id).body.at("turn"), 0);
}

TEST(Session, SingleShotIsTerminatedOnCreate) {
  Service s;
  auto r = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}, {"mode", "single_shot"}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body.at("status"), "terminated");
  EXPECT_EQ(r.body.at("termination"), "single_shot");
  EXPECT_TRUE(r.body.at("question").is_null());
  EXPECT_EQ(r.body.at("belief").size(), 5u);
}

TEST(Session, NaiveEntropyShowsZeroDivAndCon) {
  Service s;
  auto r = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}, {"mode", "naive_entropy"}});
  ASSERT_EQ(r.status, 201);
  for (const auto& row : r.body.at("scores")) {
    EXPECT_EQ(row.at("div"), 0.0);
    EXPECT_EQ(row.at("con"), 0.0);
  }
}

TEST(Session, FinalizeEndsDialogue) {
  Service s;
  auto id = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}}).body.at("id").get<std::string>();
  auto r = s.post("/v1/sessions/" + id + "/finalize", nlohmann::json::object());
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("termination"), "finalized");
  EXPECT_EQ(s.post("/v1/sessions/" + id + "/answer", {{"answer", "x"}}).status, 409);
}

TEST(Session, CorpusGroundTruthNotExposed) {
  auto provider = flat_provider();
  std::vector<std::string> doctor_prompts;
  for (auto role : {prompts::PromptRole::DoctorDifferential, prompts::PromptRole::DoctorDiscriminatory,
                    prompts::PromptRole::DoctorExploratory, prompts::PromptRole::Update}) {
    auto inner = provider.handlers[role];
    provider.handlers[role] = [inner, &doctor_prompts](const PromptRequest& r) {
      doctor_prompts.push_back(r.text);
      return inner(r);
    };
  }
  auto rec = testing_support::fixture_case();
  rec.ground_truth = "POISON-GT-91c";
  icd::IcdIndex idx;
  auto m = icd::SimilarityMatrix::with_default_chapters();
  SessionService svc(provider, idx, m, {}, {rec});
  auto r = svc.handle("POST", "/v1/sessions", R"({"case_id": "chest-pain-44m"})");
  ASSERT_EQ(r.status, 201);
  auto id = r.body.at("id").get<std::string>();
  r = svc.handle("POST", "/v1/sessions/" + id + "/answer", R"({"answer": "No."})");
  r = svc.handle("POST", "/v1/sessions/" + id + "/finalize", "");
  EXPECT_EQ(r.body.at("status"), "terminated");
  EXPECT_EQ(r.body.dump().find("POISON-GT"), std::string::npos);
  EXPECT_FALSE(r.body.contains("evaluation"));
  EXPECT_FALSE(doctor_prompts.empty());
  for (const auto& text : doctor_prompts) EXPECT_EQ(text.find("POISON-GT"), std::string::npos);
  EXPECT_EQ(provider.calls[prompts::PromptRole::Evaluator], 1);
}

TEST(Session, ClientSuppliedGroundTruthIsEvaluated) {
  Service s;
  auto r = s.post("/v1/sessions", {{"case", fixture_case_json()}, {"mode", "single_shot"}});
  ASSERT_EQ(r.status, 201) << r.body.dump();
  ASSERT_TRUE(r.body.contains("evaluation"));
  EXPECT_EQ(r.body.at("evaluation").at("correct_rank"), 1);
}

TEST(Session, IdleSessionsExpire) {
  ServiceConfig cfg;
  cfg.idle_timeout = std::chrono::seconds(60);
  Service s(cfg);
  auto t0 = SessionService::Clock::now();
  auto now = t0;
  s.svc->set_clock([&now] { return now; });
  auto id = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}}).body.at("id").get<std::string>();
  now = t0 + std::chrono::seconds(30);
  EXPECT_EQ(s.get("/v1/sessions/" + id).status, 200);
  now = t0 + std::chrono::seconds(80);
  EXPECT_EQ(s.get("/v1/sessions/" + id).status, 200);
  now = t0 + std::chrono::seconds(200);
  auto gone = s.get("/v1/sessions/" + id);
  EXPECT_EQ(gone.status, 404);
  EXPECT_EQ(gone.body.at("code"), "unknown_session");
  EXPECT_EQ(s.svc->session_count(), 0u);
}

TEST(Session, ProviderFailureIs502) {
  ScriptedProvider broken;
  icd::IcdIndex idx;
  auto m = icd::SimilarityMatrix::with_default_chapters();
  SessionService svc(broken, idx, m, {}, {testing_support::fixture_case()});
  auto r = svc.handle("POST", "/v1/sessions", R"({"case_id": "chest-pain-44m"})");
  EXPECT_EQ(r.status, 502);
  EXPECT_EQ(r.body.at("code"), "provider_failure");
}

TEST(Session, ConcurrentSessionsAreIndependent) {
  Service s;
  std::vector<std::string> ids(4);
  std::vector<std::thread> ts;
  for (int i = 0; i < 4; ++i)
    ts.emplace_back([&, i] {
      ids[i] = s.post("/v1/sessions", {{"case_id", "chest-pain-44m"}}).body.at("id").get<std::string>();
      for (int k = 0; k < 3; ++k) s.post("/v1/sessions/" + ids[i] + "/answer", {{"answer", "no"}});
    });
  for (auto& t : ts) t.join();
  EXPECT_EQ(s.svc->session_count(), 4u);
  for (const auto& id : ids) EXPECT_EQ(s.get("/v1/sessions/" + id).body.at("turn"), 3);
}

TEST(Http, ServesApiOverSocket) {
  Service s;
  httplib::Server server;
  mount(server, *s.svc);
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto health = cli.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

  auto created = cli.Post("/v1/sessions", R"({"case_id": "chest-pain-44m"})", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  auto id = nlohmann::json::parse(created->body).at("id").get<std::string>();

  auto answered = cli.Post("/v1/sessions/" + id + "/answer", R"({"answer": "No, I've never smoked."})", "application/json");
  ASSERT_TRUE(answered);
  EXPECT_EQ(answered->status, 200);
  EXPECT_EQ(nlohmann::json::parse(answered->body).at("turn"), 1);

  auto bad = cli.Post("/v1/sessions", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto pre = cli.Options("/v1/sessions");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);

  server.stop();
  th.join();
}
