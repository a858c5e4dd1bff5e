#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "inquire/case.hpp"
#include "inquire/prompts.hpp"
#include "inquire/provider.hpp"

namespace inquire {

// Patient agent. The only agent, besides the Evaluator, that sees the
// unmasked case.
inline std::string patient_answer(const StructuredCase& full_case, const std::string& question,
                                  const Provider& provider, const DecodingParams& decoding, std::uint64_t seed) {
  PromptRequest req{prompts::PromptRole::Patient, prompts::patient(flatten(full_case), question)};
  return parse_response_field(complete_with_retry(provider, req, decoding, seed));
}

struct CaseUpdate {
  StructuredCase patient_case;
  std::optional<std::string> evidence;
};

// Strips a "Response:" marker and the {'...'} wrapping some models echo back.
inline std::string parse_summary(const std::string& raw) {
  std::string s = raw;
  if (auto pos = s.rfind("Response:"); pos != std::string::npos) s = s.substr(pos + 9);
  s = text::trim(s);
  if (s.size() >= 4 && s.starts_with("{'") && s.ends_with("'}")) s = text::trim(s.substr(2, s.size() - 4));
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    s = text::trim(s.substr(1, s.size() - 2));
  return s;
}

// Update agent: one summarizing sentence appended as acquired evidence, or
// no change when the answer carries no information.
inline CaseUpdate update_case(const StructuredCase& current, const std::string& question, const std::string& answer,
                              const Provider& provider, const DecodingParams& decoding, std::uint64_t seed) {
  PromptRequest req{prompts::PromptRole::Update, prompts::update({question, answer})};
  auto summary = parse_summary(complete_with_retry(provider, req, decoding, seed));
  if (is_null_evidence(summary)) return {current, std::nullopt};
  return {append_evidence(current, summary), summary};
}

inline bool evaluate_diagnosis(const std::string& ground_truth, const std::string& predicted, const Provider& provider,
                               const DecodingParams& decoding, std::uint64_t seed) {
  if (text::trim(ground_truth).empty() || text::trim(predicted).empty()) return false;
  PromptRequest req{prompts::PromptRole::Evaluator, prompts::evaluator(ground_truth, predicted)};
  return parse_verdict(complete_with_retry(provider, req, decoding, seed));
}

}  // namespace inquire
