#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inquire/belief.hpp"
#include "inquire/provider.hpp"
#include "inquire/selector.hpp"

namespace inquire {

enum class DialogueMode { SingleShot, NaiveMultiTurn, NaiveEntropy, MedClarify, RandomQuestion };

inline const char* to_string(DialogueMode m) {
  switch (m) {
    case DialogueMode::SingleShot: return "single_shot";
    case DialogueMode::NaiveMultiTurn: return "naive_multi_turn";
    case DialogueMode::NaiveEntropy: return "naive_entropy";
    case DialogueMode::MedClarify: return "medclarify";
    case DialogueMode::RandomQuestion: return "random_question";
  }
  return "?";
}

inline DialogueMode parse_dialogue_mode(std::string_view s) {
  for (auto m : {DialogueMode::SingleShot, DialogueMode::NaiveMultiTurn, DialogueMode::NaiveEntropy,
                 DialogueMode::MedClarify, DialogueMode::RandomQuestion})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown mode '" + std::string(s) +
                    "' (expected single_shot|naive_multi_turn|naive_entropy|medclarify|random_question)");
}

enum class Termination { None, MaxTurns, Confidence, Gap, SingleShot, Finalized, Failed };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::MaxTurns: return "max_turns";
    case Termination::Confidence: return "confidence";
    case Termination::Gap: return "gap";
    case Termination::SingleShot: return "single_shot";
    case Termination::Finalized: return "finalized";
    case Termination::Failed: return "failed";
  }
  return "?";
}

inline Termination parse_termination(std::string_view s) {
  for (auto t : {Termination::None, Termination::MaxTurns, Termination::Confidence, Termination::Gap,
                 Termination::SingleShot, Termination::Finalized, Termination::Failed})
    if (s == to_string(t)) return t;
  throw ParseError("unknown termination '" + std::string(s) + "'");
}

inline Termination termination_for(StopReason r) {
  switch (r) {
    case StopReason::MaxTurns: return Termination::MaxTurns;
    case StopReason::Confidence: return Termination::Confidence;
    case StopReason::Gap: return Termination::Gap;
    case StopReason::None: break;
  }
  return Termination::None;
}

struct ScoreRow {
  CandidateQuestion question;
  DeigScore score;
};

struct TurnRecord {
  int turn = 0;
  CandidateQuestion question;
  std::vector<ScoreRow> scores;
  std::string answer;
  std::optional<std::string> evidence;
  Belief belief_before;
  Belief belief_after;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
};

// Stop thresholds are applied to the normalized (and, for modes with Bayesian
// updating, temperature-scaled) belief; recorded in every header.
inline constexpr const char* kStopBasis = "normalized_posterior";

struct Transcript {
  std::string case_id;
  DialogueMode mode = DialogueMode::MedClarify;
  std::string mask = "none";
  std::uint64_t seed = 0;
  ProviderIdentity provider;
  SelectorConfig config;
  std::string input_digest;
  Belief initial_belief;
  double initial_entropy = 0.0;
  std::vector<TurnRecord> turns;
  Termination termination = Termination::None;
  Belief final_belief;
  std::optional<std::string> ground_truth;
  std::vector<bool> verdicts;
  int correct_rank = 0;
  bool failed = false;
  std::string error;

  std::size_t question_count() const { return turns.size(); }
  // Beliefs after turn 0, 1, ..., n.
  std::vector<Belief> belief_trace() const {
    std::vector<Belief> out{initial_belief};
    for (const auto& t : turns) out.push_back(t.belief_after);
    return out;
  }
};

inline nlohmann::json to_json(const CandidateQuestion& q) {
  nlohmann::json j{{"index", q.index}, {"text", q.text}, {"kind", to_string(q.kind)}};
  if (q.kind == QuestionKind::Discriminatory) {
    j["refute"] = q.refute;
    j["support"] = q.support;
  }
  return j;
}

inline CandidateQuestion question_from_json(const nlohmann::json& j) {
  CandidateQuestion q;
  q.index = j.at("index").get<std::size_t>();
  q.text = j.at("text").get<std::string>();
  auto kind = j.at("kind").get<std::string>();
  q.kind = kind == "discriminatory" ? QuestionKind::Discriminatory
           : kind == "naive"        ? QuestionKind::Naive
           : kind == "bank"         ? QuestionKind::Bank
                                    : QuestionKind::Exploratory;
  q.refute = j.value("refute", std::size_t{0});
  q.support = j.value("support", std::size_t{0});
  return q;
}

inline nlohmann::json to_json(const DeigScore& s) {
  return {{"ig", s.ig}, {"div", s.div}, {"con", s.con}, {"total", s.total}};
}

inline DeigScore score_from_json(const nlohmann::json& j) {
  return {j.at("ig").get<double>(), j.at("div").get<double>(), j.at("con").get<double>(), j.at("total").get<double>()};
}

inline nlohmann::json to_json(const ScoreRow& r) {
  auto j = to_json(r.question);
  j["score"] = to_json(r.score);
  return j;
}

inline nlohmann::json to_json(const TurnRecord& t) {
  auto scores = nlohmann::json::array();
  for (const auto& r : t.scores) scores.push_back(to_json(r));
  return {
      {"turn", t.turn},
      {"question", to_json(t.question)},
      {"scores", scores},
      {"answer", t.answer},
      {"evidence", t.evidence ? nlohmann::json(*t.evidence) : nlohmann::json(nullptr)},
      {"belief_before", to_json(t.belief_before)},
      {"belief_after", to_json(t.belief_after)},
      {"entropy_before", t.entropy_before},
      {"entropy_after", t.entropy_after},
  };
}

inline TurnRecord turn_from_json(const nlohmann::json& j) {
  TurnRecord t;
  t.turn = j.at("turn").get<int>();
  t.question = question_from_json(j.at("question"));
  for (const auto& r : j.at("scores")) t.scores.push_back({question_from_json(r), score_from_json(r.at("score"))});
  t.answer = j.at("answer").get<std::string>();
  if (!j.at("evidence").is_null()) t.evidence = j.at("evidence").get<std::string>();
  t.belief_before = belief_from_json(j.at("belief_before"), t.turn - 1);
  t.belief_after = belief_from_json(j.at("belief_after"), t.turn);
  t.entropy_before = j.at("entropy_before").get<double>();
  t.entropy_after = j.at("entropy_after").get<double>();
  return t;
}

inline nlohmann::json to_json(const Transcript& t) {
  auto turns = nlohmann::json::array();
  for (const auto& r : t.turns) turns.push_back(to_json(r));
  return {
      {"case_id", t.case_id},
      {"mode", to_string(t.mode)},
      {"mask", t.mask},
      {"seed", t.seed},
      {"provider", {{"name", t.provider.provider}, {"model", t.provider.model}}},
      {"config", to_json(t.config)},
      {"input_digest", t.input_digest},
      {"stop_basis", kStopBasis},
      {"initial_belief", to_json(t.initial_belief)},
      {"initial_entropy", t.initial_entropy},
      {"turns", turns},
      {"termination", to_string(t.termination)},
      {"final_differential", to_json(t.final_belief)},
      {"ground_truth", t.ground_truth ? nlohmann::json(*t.ground_truth) : nlohmann::json(nullptr)},
      {"verdicts", t.verdicts},
      {"correct_rank", t.correct_rank},
      {"status", t.failed ? "failed" : "ok"},
      {"error", t.error},
  };
}

inline Transcript transcript_from_json(const nlohmann::json& j) {
  try {
    Transcript t;
    t.case_id = j.at("case_id").get<std::string>();
    t.mode = parse_dialogue_mode(j.at("mode").get<std::string>());
    t.mask = j.at("mask").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.provider = {j.at("provider").at("name").get<std::string>(), j.at("provider").at("model").get<std::string>()};
    t.config = config_from_json(j.at("config"));
    t.input_digest = j.at("input_digest").get<std::string>();
    t.initial_belief = belief_from_json(j.at("initial_belief"), 0);
    t.initial_entropy = j.at("initial_entropy").get<double>();
    for (const auto& r : j.at("turns")) t.turns.push_back(turn_from_json(r));
    t.termination = parse_termination(j.at("termination").get<std::string>());
    t.final_belief = belief_from_json(j.at("final_differential"), static_cast<int>(t.turns.size()));
    if (!j.at("ground_truth").is_null()) t.ground_truth = j.at("ground_truth").get<std::string>();
    t.verdicts = j.at("verdicts").get<std::vector<bool>>();
    t.correct_rank = j.at("correct_rank").get<int>();
    t.failed = j.at("status").get<std::string>() == "failed";
    t.error = j.at("error").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed transcript: ") + e.what());
  }
}

}  // namespace inquire
