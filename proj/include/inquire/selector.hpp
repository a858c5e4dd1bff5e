#pragma once

#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "inquire/belief.hpp"
#include "inquire/case.hpp"
#include "inquire/error.hpp"
#include "inquire/icd.hpp"
#include "inquire/prompts.hpp"
#include "inquire/provider.hpp"

namespace inquire {

enum class ScoringMode { Deig, NaiveEntropy };

inline const char* to_string(ScoringMode m) { return m == ScoringMode::Deig ? "deig" : "naive_entropy"; }

inline ScoringMode parse_scoring_mode(std::string_view s) {
  if (s == "deig") return ScoringMode::Deig;
  if (s == "naive_entropy") return ScoringMode::NaiveEntropy;
  throw ConfigError("unknown scoring_mode '" + std::string(s) + "' (expected deig|naive_entropy)");
}

struct SelectorConfig {
  std::size_t k = 5;
  double alpha = 0.5;
  double beta = 0.35;
  double gamma = 0.15;
  double temperature = 1.1;
  int max_turns = 10;
  double p_max_threshold = 0.97;
  double gap_threshold = 0.85;
  ScoringMode scoring_mode = ScoringMode::Deig;

  void validate() const {
    if (k < 2) throw ConfigError("k must be at least 2");
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) throw ConfigError("alpha, beta, gamma must be >= 0");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (max_turns < 0) throw ConfigError("max_turns must be >= 0");
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(p_max_threshold) || !in_unit(gap_threshold)) throw ConfigError("thresholds must lie in (0, 1]");
  }

  bool operator==(const SelectorConfig&) const = default;
};

inline nlohmann::json to_json(const SelectorConfig& c) {
  return {
      {"k", c.k},
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"gamma", c.gamma},
      {"temperature", c.temperature},
      {"max_turns", c.max_turns},
      {"p_max_threshold", c.p_max_threshold},
      {"gap_threshold", c.gap_threshold},
      {"scoring_mode", to_string(c.scoring_mode)},
  };
}

// Overrides `base` with the keys present in `j`. Unknown keys and wrong types
// are configuration errors.
inline SelectorConfig config_from_json(const nlohmann::json& j, SelectorConfig base = {}) {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError("selector config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& v = it.value();
      if (key == "k") {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("k must be a nonnegative integer");
        base.k = v.get<std::size_t>();
      } else if (key == "alpha") base.alpha = v.get<double>();
      else if (key == "beta") base.beta = v.get<double>();
      else if (key == "gamma") base.gamma = v.get<double>();
      else if (key == "temperature") base.temperature = v.get<double>();
      else if (key == "max_turns") {
        if (!v.is_number_integer()) throw ConfigError("max_turns must be an integer");
        base.max_turns = v.get<int>();
      } else if (key == "p_max_threshold") base.p_max_threshold = v.get<double>();
      else if (key == "gap_threshold") base.gap_threshold = v.get<double>();
      else if (key == "scoring_mode") base.scoring_mode = parse_scoring_mode(v.get<std::string>());
      else throw ConfigError("unknown selector config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad selector config value: ") + e.what());
  }
  base.validate();
  return base;
}

enum class QuestionKind { Discriminatory, Exploratory, Naive, Bank };

inline const char* to_string(QuestionKind k) {
  switch (k) {
    case QuestionKind::Discriminatory: return "discriminatory";
    case QuestionKind::Exploratory: return "exploratory";
    case QuestionKind::Naive: return "naive";
    case QuestionKind::Bank: return "bank";
  }
  return "?";
}

struct CandidateQuestion {
  std::string text;
  QuestionKind kind = QuestionKind::Exploratory;
  // Discriminatory only: rank of the candidate to refute (always 0) and of
  // the one to support.
  std::size_t refute = 0;
  std::size_t support = 0;
  std::size_t index = 0;

  bool operator==(const CandidateQuestion&) const = default;
};

struct SimulationOutcome {
  Belief diag_plus;
  Belief diag_minus;
};

struct DeigScore {
  double ig = 0.0;
  double div = 0.0;
  double con = 0.0;
  double total = 0.0;

  bool operator==(const DeigScore&) const = default;
};

// Prior entropy minus the mean of the two simulated posterior entropies, in
// bits.
inline double information_gain(const Distribution& prior, const Distribution& post_plus,
                               const Distribution& post_minus) {
  return entropy_bits(prior) - 0.5 * (entropy_bits(post_plus) + entropy_bits(post_minus));
}

inline DeigScore weighted(double ig, double div, double con, const SelectorConfig& config) {
  if (config.scoring_mode == ScoringMode::NaiveEntropy) return {ig, 0.0, 0.0, ig};
  return {ig, div, con, config.alpha * ig + config.beta * div + config.gamma * con};
}

inline DeigScore score(const SimulationOutcome& outcome, const Distribution& prior, const SelectorConfig& config,
                       const icd::SimilarityMatrix& matrix) {
  double ig = information_gain(prior, normalize(outcome.diag_plus), normalize(outcome.diag_minus));
  if (config.scoring_mode == ScoringMode::NaiveEntropy) return weighted(ig, 0.0, 0.0, config);
  auto ch_plus = icd::chapters_of(outcome.diag_plus);
  auto ch_minus = icd::chapters_of(outcome.diag_minus);
  auto c_plus = icd::confidences_of(outcome.diag_plus);
  auto c_minus = icd::confidences_of(outcome.diag_minus);
  return weighted(ig, icd::div(ch_plus, ch_minus, matrix), icd::con(c_plus, c_minus), config);
}

// Index of the maximal total; the lowest index wins ties.
inline std::size_t select_index(std::span<const DeigScore> scores) {
  if (scores.empty()) throw EmptyQuestionSet("no scored questions to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i].total > scores[best].total) best = i;
  return best;
}

inline const CandidateQuestion& select(std::span<const CandidateQuestion> questions,
                                       std::span<const DeigScore> scores) {
  if (questions.empty() || questions.size() != scores.size())
    throw EmptyQuestionSet("question and score lists must be non-empty and aligned");
  return questions[select_index(scores)];
}

enum class StopReason { None, MaxTurns, Confidence, Gap };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "continue";
    case StopReason::MaxTurns: return "max_turns";
    case StopReason::Confidence: return "confidence";
    case StopReason::Gap: return "gap";
  }
  return "?";
}

struct StopDecision {
  StopReason reason = StopReason::None;

  bool stop() const { return reason != StopReason::None; }
};

// Checked in a fixed order: turn budget, top-1 confidence, top-1/top-2 gap.
inline StopDecision should_stop(const Distribution& dist, int turn, const SelectorConfig& config) {
  if (turn >= config.max_turns) return {StopReason::MaxTurns};
  auto g = top_gap(dist);
  if (g.p_max > config.p_max_threshold) return {StopReason::Confidence};
  if (g.delta > config.gap_threshold) return {StopReason::Gap};
  return {};
}

// Everything one doctor-side step needs besides the case itself.
struct InquiryContext {
  const Provider& provider;
  const icd::IcdIndex& index;
  const icd::SimilarityMatrix& matrix;
  SelectorConfig config;
  DecodingParams decoding;
  std::uint64_t seed = 42;
  bool parallel_simulations = false;
  // Fixed question pool for the random-question baseline.
  std::vector<std::string> question_bank;
};

// Step 1: differential for the given case text. One repair re-prompt on an
// unparseable response, then MalformedDifferential.
inline Belief request_differential(const InquiryContext& ctx, const std::string& case_text,
                                   const std::vector<prompts::QaPair>& history, const Belief& previous) {
  PromptRequest req{prompts::PromptRole::DoctorDifferential,
                    prompts::differential(case_text, history, previous, ctx.config.k)};
  std::vector<Candidate> raw;
  try {
    raw = parse_differential(complete_with_retry(ctx.provider, req, ctx.decoding, ctx.seed));
  } catch (const MalformedDifferential&) {
    req.text += prompts::repair_suffix();
    raw = parse_differential(complete_with_retry(ctx.provider, req, ctx.decoding, ctx.seed));
  }
  Belief b{std::move(raw), 0};
  b = icd::resolve_belief(std::move(b), ctx.index);
  return make_belief(std::move(b.candidates), ctx.config.k);
}

namespace detail {

inline bool asked_before(const std::string& question, const std::vector<prompts::QaPair>& history) {
  auto key = text::canonical_name(question);
  for (const auto& qa : history)
    if (text::canonical_name(qa.question) == key) return true;
  return false;
}

// One generation call plus at most one regeneration when the question
// repeats the history verbatim.
inline std::string generate_question(const InquiryContext& ctx, PromptRequest req,
                                     const std::vector<prompts::QaPair>& history) {
  auto q = parse_response_field(complete_with_retry(ctx.provider, req, ctx.decoding, ctx.seed));
  if (!asked_before(q, history)) return q;
  req.text += prompts::regenerate_suffix(q);
  return parse_response_field(complete_with_retry(ctx.provider, req, ctx.decoding, ctx.seed));
}

}  // namespace detail

// Step 2: n-1 discriminatory questions (top-1 against each lower rank) and
// one exploratory question.
inline std::vector<CandidateQuestion> build_question_set(const Belief& belief, const StructuredCase& patient_case,
                                                         const std::vector<prompts::QaPair>& history,
                                                         const InquiryContext& ctx) {
  if (belief.size() < 2) throw EmptyQuestionSet("question generation needs at least two candidates");
  const auto case_text = flatten(patient_case);
  std::vector<CandidateQuestion> out;
  const auto& top = belief.candidates.front().name;
  for (std::size_t i = 1; i < belief.size(); ++i) {
    PromptRequest req{prompts::PromptRole::DoctorDiscriminatory,
                      prompts::discriminatory(case_text, top, belief.candidates[i].name, history)};
    out.push_back({detail::generate_question(ctx, std::move(req), history), QuestionKind::Discriminatory, 0, i,
                   out.size()});
  }
  PromptRequest req{prompts::PromptRole::DoctorExploratory, prompts::exploratory(case_text, belief, history)};
  out.push_back({detail::generate_question(ctx, std::move(req), history), QuestionKind::Exploratory, 0, 0, out.size()});
  return out;
}

// Step 3a: differentials under a hypothetical "yes" and "no" answer.
inline SimulationOutcome simulate_outcomes(const CandidateQuestion& q, const StructuredCase& patient_case,
                                           const std::vector<prompts::QaPair>& history, const Belief& belief,
                                           const InquiryContext& ctx) {
  auto branch = [&](bool yes) {
    auto hypothetical = append_evidence(patient_case, prompts::hypothetical_answer(q.text, yes));
    return request_differential(ctx, flatten(hypothetical), history, belief);
  };
  return {branch(true), branch(false)};
}

struct ScoredQuestions {
  std::vector<CandidateQuestion> questions;
  std::vector<SimulationOutcome> outcomes;
  std::vector<DeigScore> scores;
  std::size_t selected = 0;
};

// Step 3: simulate every question (2 calls each), score and pick the argmax.
inline ScoredQuestions score_questions(std::vector<CandidateQuestion> questions, const StructuredCase& patient_case,
                                       const std::vector<prompts::QaPair>& history, const Belief& belief,
                                       const InquiryContext& ctx) {
  ScoredQuestions out;
  out.questions = std::move(questions);
  if (out.questions.empty()) throw EmptyQuestionSet("empty question set");
  if (ctx.parallel_simulations) {
    std::vector<std::future<SimulationOutcome>> pending;
    for (const auto& q : out.questions)
      pending.push_back(std::async(std::launch::async, [&, q] { return simulate_outcomes(q, patient_case, history, belief, ctx); }));
    for (auto& f : pending) out.outcomes.push_back(f.get());
  } else {
    for (const auto& q : out.questions) out.outcomes.push_back(simulate_outcomes(q, patient_case, history, belief, ctx));
  }
  const auto prior = normalize(belief);
  for (const auto& o : out.outcomes) out.scores.push_back(score(o, prior, ctx.config, ctx.matrix));
  out.selected = select_index(out.scores);
  return out;
}

}  // namespace inquire
