#pragma once

#include <cstdint>
#include <string>

#include "inquire/agents.hpp"
#include "inquire/case.hpp"
#include "inquire/icd.hpp"
#include "inquire/inquiry.hpp"
#include "inquire/text.hpp"
#include "inquire/transcript.hpp"

namespace inquire {

struct DialogueOptions {
  DialogueMode mode = DialogueMode::MedClarify;
  MaskMode mask = MaskMode::none();
  SelectorConfig config;
  DecodingParams decoding;
  std::uint64_t seed = 42;
  bool parallel_simulations = false;
  std::vector<std::string> question_bank;
};

inline std::string input_digest(const StructuredCase& masked) {
  return text::hex64(text::fnv1a(case_to_json(masked).dump()));
}

// Per-case stream for the random-question baseline, so that cases sharing a
// seed do not share picks.
inline std::uint64_t case_rng_seed(std::uint64_t seed, const std::string& case_id) {
  return text::fnv1a(case_id) ^ (seed * 0x9e3779b97f4a7c15ULL);
}

// Ranks 1..n are judged in order until the first match.
inline void evaluate_final(Transcript& t, const std::string& ground_truth, const Provider& provider,
                           const DecodingParams& decoding, std::uint64_t seed) {
  t.verdicts.clear();
  t.correct_rank = 0;
  for (std::size_t i = 0; i < t.final_belief.size(); ++i) {
    bool ok = evaluate_diagnosis(ground_truth, t.final_belief.candidates[i].name, provider, decoding, seed);
    t.verdicts.push_back(ok);
    if (ok) {
      t.correct_rank = static_cast<int>(i) + 1;
      break;
    }
  }
}

inline void fill_from(Transcript& t, const Inquiry& inq) {
  t.config = inq.config();
  t.initial_belief = inq.initial_belief();
  t.initial_entropy = inq.initial_belief().empty() ? 0.0 : entropy_bits(inq.initial_belief());
  t.turns = inq.turns();
  t.termination = inq.termination();
  t.final_belief = inq.belief();
  trim_to(t.final_belief, 5);
}

// Simulated interview: the Patient agent answers from the unmasked case, the
// doctor side only ever sees the masked view.
inline Transcript run_dialogue(const CaseRecord& record, const DialogueOptions& opt, const Provider& provider,
                               const icd::IcdIndex& index, const icd::SimilarityMatrix& matrix) {
  Transcript t;
  t.case_id = record.case_id;
  t.mode = opt.mode;
  t.mask = to_string(opt.mask);
  t.seed = opt.seed;
  t.provider = provider.identity();
  t.config = opt.config;
  if (!record.ground_truth.empty()) t.ground_truth = record.ground_truth;

  auto masked = apply_mask(record.patient, opt.mask);
  t.input_digest = input_digest(masked);

  InquiryContext ctx{provider, index, matrix, opt.config, opt.decoding, opt.seed, opt.parallel_simulations,
                     opt.question_bank};
  Inquiry inq(std::move(masked), opt.mode, ctx, case_rng_seed(opt.seed, record.case_id));
  try {
    inq.start();
    while (inq.status() == InquiryStatus::AwaitingAnswer) {
      auto reply = patient_answer(record.patient, inq.pending()->question.text, provider, opt.decoding, opt.seed);
      inq.answer(reply);
    }
  } catch (const Error& e) {
    inq.fail();
    t.failed = true;
    t.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  fill_from(t, inq);
  if (t.ground_truth && !t.final_belief.empty()) {
    try {
      evaluate_final(t, *t.ground_truth, provider, opt.decoding, opt.seed);
    } catch (const Error& e) {
      t.failed = true;
      if (t.error.empty()) t.error = std::string(to_string(e.code())) + ": " + e.what();
    }
  }
  return t;
}

}  // namespace inquire
