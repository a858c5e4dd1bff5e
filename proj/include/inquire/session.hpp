#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "inquire/case.hpp"
#include "inquire/dialogue.hpp"
#include "inquire/icd.hpp"
#include "inquire/inquiry.hpp"
#include "inquire/transcript.hpp"

namespace inquire {

struct ServiceConfig {
  SelectorConfig selector;
  DecodingParams decoding;
  std::chrono::seconds idle_timeout{1800};
  std::string transcript_path;  // empty: completed transcripts are not persisted
  std::uint64_t default_seed = 42;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

inline ApiResponse api_error(int status, std::string code, std::string message) {
  return {status, {{"code", std::move(code)}, {"message", std::move(message)}}};
}

// 128 random bits from the OS entropy source, hex encoded.
inline std::string new_session_token() {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard lock(mu);
  std::string out;
  for (int i = 0; i < 4; ++i) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
    out += buf;
  }
  return out;
}

inline nlohmann::json belief_view(const Belief& b) {
  auto out = nlohmann::json::array();
  if (b.empty()) return out;
  auto d = normalize(b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& c = b.candidates[i];
    out.push_back({{"name", c.name},
                   {"icd_code", c.icd_code ? nlohmann::json(*c.icd_code) : nlohmann::json(nullptr)},
                   {"chapter", to_json(c.chapter)},
                   {"probability", d.probs[i]}});
  }
  return out;
}

inline nlohmann::json score_table(const std::vector<ScoreRow>& rows, std::size_t selected) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = to_json(r.question);
    j["ig"] = r.score.ig;
    j["div"] = r.score.div;
    j["con"] = r.score.con;
    j["total"] = r.score.total;
    j["selected"] = r.question.index == selected;
    out.push_back(std::move(j));
  }
  return out;
}

class SessionService {
 public:
  using Clock = std::chrono::steady_clock;

  SessionService(const Provider& provider, const icd::IcdIndex& index, const icd::SimilarityMatrix& matrix,
                 ServiceConfig cfg, std::vector<CaseRecord> corpus = {})
      : provider_(provider), index_(index), matrix_(matrix), cfg_(std::move(cfg)), now_([] { return Clock::now(); }) {
    cfg_.selector.validate();
    for (auto& c : corpus) corpus_.emplace(c.case_id, std::move(c));
  }

  // Replaces the clock, for expiry tests.
  void set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

  std::size_t session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) {
    expire_idle();
    static constexpr std::string_view kPrefix = "/v1/sessions";
    if (path == "/v1/health") {
      if (method != "GET") return api_error(405, "method_not_allowed", "use GET");
      return {200,
              {{"status", "ok"},
               {"sessions", session_count()},
               {"provider", {{"name", provider_.identity().provider}, {"model", provider_.identity().model}}}}};
    }
    if (path == kPrefix) {
      if (method != "POST") return api_error(405, "method_not_allowed", "use POST");
      return create(body);
    }
    if (!path.starts_with(std::string(kPrefix) + "/")) return api_error(404, "not_found", "no route " + path);
    auto rest = path.substr(kPrefix.size() + 1);
    auto slash = rest.find('/');
    auto id = rest.substr(0, slash);
    auto action = slash == std::string::npos ? std::string() : rest.substr(slash + 1);
    auto session = find(id);
    if (!session) return api_error(404, "unknown_session", "no session " + id);
    if (action.empty()) {
      if (method != "GET") return api_error(405, "method_not_allowed", "use GET");
      std::lock_guard lock(session->snap_mu);
      return {200, *session->snapshot};
    }
    if (method != "POST") return api_error(405, "method_not_allowed", "use POST");
    if (action == "answer") return answer(*session, body);
    if (action == "finalize") return finalize(*session);
    return api_error(404, "not_found", "no route " + path);
  }

 private:
  struct Session {
    std::string id;
    CaseRecord record;
    bool from_corpus = false;
    MaskMode mask;
    std::uint64_t seed = 42;
    std::unique_ptr<Inquiry> inquiry;
    std::optional<Transcript> outcome;
    std::string last_error;
    std::mutex mu;  // one mutation at a time
    std::mutex snap_mu;
    std::shared_ptr<const nlohmann::json> snapshot;
    Clock::time_point last_access;
  };

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    it->second->last_access = now_();
    return it->second;
  }

  void expire_idle() {
    std::lock_guard lock(mu_);
    const auto now = now_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second->last_access > cfg_.idle_timeout)
        it = sessions_.erase(it);
      else
        ++it;
    }
  }

  static ApiResponse from_error(const Error& e) {
    switch (e.code()) {
      case ErrorCode::Parse:
      case ErrorCode::MalformedCase: return api_error(400, to_string(e.code()), e.what());
      case ErrorCode::InvalidConfig: return api_error(422, to_string(e.code()), e.what());
      case ErrorCode::ProviderFailure:
      case ErrorCode::MalformedDifferential: return api_error(502, to_string(e.code()), e.what());
      default: return api_error(500, to_string(e.code()), e.what());
    }
  }

  ApiResponse create(const std::string& body) {
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return api_error(400, "parse_error", std::string("request body is not JSON: ") + e.what());
    }
    if (!req.is_object()) return api_error(400, "parse_error", "request body must be a JSON object");

    auto s = std::make_shared<Session>();
    DialogueMode mode = DialogueMode::MedClarify;
    SelectorConfig selector;
    try {
      if (req.contains("case")) {
        const auto& c = req.at("case");
        std::vector<std::string> warnings;
        s->record = c.is_object() && c.contains("Patient_Case")
                        ? case_record_from_json(c, warnings)
                        : case_record_from_json(nlohmann::json{{"Patient_Case", c}}, warnings);
      } else if (req.contains("case_id")) {
        if (!req.at("case_id").is_string()) return api_error(400, "malformed_case", "case_id must be a string");
        auto it = corpus_.find(req.at("case_id").get<std::string>());
        if (it == corpus_.end()) return api_error(404, "unknown_case", "no corpus case " + req.at("case_id").dump());
        s->record = it->second;
        s->from_corpus = true;
      } else {
        return api_error(400, "malformed_case", "request needs 'case' or 'case_id'");
      }
      auto str = [&](const char* key, const char* fallback) {
        auto it = req.find(key);
        if (it == req.end()) return std::string(fallback);
        if (!it->is_string()) throw ConfigError(std::string(key) + " must be a string");
        return it->get<std::string>();
      };
      mode = parse_dialogue_mode(str("mode", "medclarify"));
      s->mask = parse_mask_mode(str("mask", "none"));
      if (auto it = req.find("seed"); it != req.end()) {
        if (!it->is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
        s->seed = it->get<std::uint64_t>();
      } else {
        s->seed = cfg_.default_seed;
      }
      selector = config_from_json(req.value("config", nlohmann::json()), cfg_.selector);
    } catch (const Error& e) {
      return from_error(e);
    } catch (const nlohmann::json::exception& e) {
      return api_error(400, "malformed_case", e.what());
    }

    s->id = new_session_token();
    InquiryContext ctx{provider_, index_, matrix_, selector, cfg_.decoding, s->seed, true, {}};
    s->inquiry = std::make_unique<Inquiry>(apply_mask(s->record.patient, s->mask), mode, ctx,
                                           case_rng_seed(s->seed, s->record.case_id));
    try {
      s->inquiry->start();
    } catch (const Error& e) {
      return from_error(e);
    }
    after_mutation(*s);
    s->last_access = now_();
    {
      std::lock_guard lock(mu_);
      sessions_.emplace(s->id, s);
    }
    std::lock_guard lock(s->snap_mu);
    return {201, *s->snapshot};
  }

  ApiResponse answer(Session& s, const std::string& body) {
    std::unique_lock lock(s.mu, std::try_to_lock);
    if (!lock) return api_error(409, "busy", "another request is updating this session");
    if (s.inquiry->status() != InquiryStatus::AwaitingAnswer)
      return api_error(409, "no_pending_question", std::string("session is ") + to_string(s.inquiry->status()));
    std::string text;
    try {
      auto j = nlohmann::json::parse(body);
      text = text::trim(j.at("answer").get<std::string>());
    } catch (const nlohmann::json::exception&) {
      return api_error(400, "parse_error", "body must be {\"answer\": string}");
    }
    if (text.empty()) return api_error(400, "empty_answer", "answer must not be empty");
    try {
      s.inquiry->answer(text);
      s.last_error.clear();
    } catch (const Error& e) {
      s.last_error = e.what();
      after_mutation(s);
      return from_error(e);
    }
    after_mutation(s);
    std::lock_guard snap(s.snap_mu);
    return {200, *s.snapshot};
  }

  ApiResponse finalize(Session& s) {
    std::unique_lock lock(s.mu, std::try_to_lock);
    if (!lock) return api_error(409, "busy", "another request is updating this session");
    s.inquiry->finalize();
    after_mutation(s);
    std::lock_guard snap(s.snap_mu);
    return {200, *s.snapshot};
  }

  // Refreshes the snapshot; on termination evaluates and persists once.
  void after_mutation(Session& s) {
    if (s.inquiry->status() == InquiryStatus::Terminated && !s.outcome) {
      Transcript t;
      t.case_id = s.record.case_id.empty() ? "session-" + s.id.substr(0, 8) : s.record.case_id;
      t.mode = s.inquiry->mode();
      t.mask = to_string(s.mask);
      t.seed = s.seed;
      t.provider = provider_.identity();
      t.input_digest = input_digest(apply_mask(s.record.patient, s.mask));
      fill_from(t, *s.inquiry);
      if (!s.record.ground_truth.empty()) {
        t.ground_truth = s.record.ground_truth;
        if (!t.final_belief.empty()) {
          try {
            evaluate_final(t, s.record.ground_truth, provider_, cfg_.decoding, s.seed);
          } catch (const Error& e) {
            t.failed = true;
            t.error = e.what();
          }
        }
      }
      persist(t);
      s.outcome = std::move(t);
    }
    auto snap = std::make_shared<const nlohmann::json>(snapshot(s));
    std::lock_guard lock(s.snap_mu);
    s.snapshot = std::move(snap);
  }

  void persist(const Transcript& t) {
    if (cfg_.transcript_path.empty()) return;
    std::lock_guard lock(file_mu_);
    std::ofstream out(cfg_.transcript_path, std::ios::app);
    out << to_json(t).dump() << '\n';
  }

  nlohmann::json snapshot(const Session& s) const {
    const auto& inq = *s.inquiry;
    auto beliefs = nlohmann::json::array();
    auto entropies = nlohmann::json::array();
    if (!inq.initial_belief().empty()) {
      beliefs.push_back(belief_view(inq.initial_belief()));
      entropies.push_back(entropy_bits(inq.initial_belief()));
    }
    auto turns = nlohmann::json::array();
    for (const auto& t : inq.turns()) {
      beliefs.push_back(belief_view(t.belief_after));
      entropies.push_back(t.entropy_after);
      auto j = to_json(t);
      j["scores"] = score_table(t.scores, t.question.index);
      turns.push_back(std::move(j));
    }
    nlohmann::json question = nullptr, scores = nlohmann::json::array();
    if (inq.pending()) {
      question = to_json(inq.pending()->question);
      scores = score_table(inq.pending()->scores, inq.pending()->question.index);
    }
    nlohmann::json j{
        {"id", s.id},
        {"mode", to_string(inq.mode())},
        {"mask", to_string(s.mask)},
        {"seed", s.seed},
        {"status", to_string(inq.status())},
        {"termination", inq.status() == InquiryStatus::Terminated ? nlohmann::json(to_string(inq.termination()))
                                                                   : nlohmann::json(nullptr)},
        {"turn", inq.turns().size()},
        {"config", to_json(inq.config())},
        {"question", question},
        {"scores", scores},
        {"belief", belief_view(inq.belief())},
        {"belief_history", beliefs},
        {"entropy_history", entropies},
        {"transcript", {{"turns", turns}}},
        {"error", s.last_error.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.last_error)},
    };
    // Verdicts only for callers who supplied the ground truth themselves.
    if (s.outcome && !s.from_corpus && s.outcome->ground_truth)
      j["evaluation"] = {{"verdicts", s.outcome->verdicts}, {"correct_rank", s.outcome->correct_rank}};
    return j;
  }

  const Provider& provider_;
  const icd::IcdIndex& index_;
  const icd::SimilarityMatrix& matrix_;
  ServiceConfig cfg_;
  std::function<Clock::time_point()> now_;
  std::map<std::string, CaseRecord> corpus_;
  mutable std::mutex mu_;
  std::mutex file_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace inquire
