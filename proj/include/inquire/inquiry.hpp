#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "inquire/agents.hpp"
#include "inquire/belief.hpp"
#include "inquire/case.hpp"
#include "inquire/selector.hpp"
#include "inquire/synthetic.hpp"
#include "inquire/transcript.hpp"

namespace inquire {

enum class InquiryStatus { SelectingQuestion, AwaitingAnswer, Terminated };

inline const char* to_string(InquiryStatus s) {
  switch (s) {
    case InquiryStatus::SelectingQuestion: return "selecting_question";
    case InquiryStatus::AwaitingAnswer: return "awaiting_answer";
    case InquiryStatus::Terminated: return "terminated";
  }
  return "?";
}

struct PendingQuestion {
  CandidateQuestion question;
  std::vector<ScoreRow> scores;
};

// Doctor side of one dialogue. Sees only the masked case and the answers fed
// to it; shared by batch dialogues and live sessions.
//
//   start()   initial differential, stop check, first question
//   answer()  update agent, belief update, stop check, next question
//
// A turn is committed only once its answer and posterior exist; a failure
// before that leaves the state untouched. A failure while choosing the next
// question keeps the committed turn and leaves the inquiry selecting, see
// resume().
class Inquiry {
 public:
  // `rng_seed` drives the random-question baseline only.
  Inquiry(StructuredCase masked_case, DialogueMode mode, InquiryContext ctx, std::optional<std::uint64_t> rng_seed = {})
      : case_(std::move(masked_case)), mode_(mode), ctx_(std::move(ctx)), rng_(rng_seed.value_or(ctx_.seed)) {
    if (mode_ == DialogueMode::NaiveEntropy) ctx_.config.scoring_mode = ScoringMode::NaiveEntropy;
    ctx_.config.validate();
  }

  void start() {
    if (started_) throw std::logic_error("inquiry already started");
    started_ = true;
    initial_ = request_differential(ctx_, flatten(case_), history_, Belief{});
    belief_ = initial_;
    if (mode_ == DialogueMode::SingleShot) {
      terminate(Termination::SingleShot);
      return;
    }
    advance();
  }

  // Returns the committed turn.
  const TurnRecord& answer(const std::string& answer_text) {
    if (status_ != InquiryStatus::AwaitingAnswer || !pending_)
      throw std::logic_error("no question is awaiting an answer");
    const auto& q = pending_->question;
    auto update = update_case(case_, q.text, answer_text, ctx_.provider, ctx_.decoding, ctx_.seed);
    auto history = history_;
    history.push_back({q.text, answer_text});
    const int turn = static_cast<int>(turns_.size()) + 1;

    Belief next = belief_;
    if (update.evidence) next = updated_belief(update.patient_case, history);
    next.turn = turn;

    TurnRecord rec;
    rec.turn = turn;
    rec.question = q;
    rec.scores = pending_->scores;
    rec.answer = answer_text;
    rec.evidence = update.evidence;
    rec.belief_before = belief_;
    rec.belief_after = next;
    rec.entropy_before = entropy_bits(belief_);
    rec.entropy_after = entropy_bits(next);

    case_ = std::move(update.patient_case);
    history_ = std::move(history);
    belief_ = std::move(next);
    turns_.push_back(std::move(rec));
    pending_.reset();
    status_ = InquiryStatus::SelectingQuestion;
    advance();
    return turns_.back();
  }

  // Retries question selection after a failure left the inquiry selecting.
  void resume() {
    if (!started_ || status_ != InquiryStatus::SelectingQuestion) throw std::logic_error("nothing to resume");
    advance();
  }

  void finalize() {
    if (status_ == InquiryStatus::Terminated) return;
    pending_.reset();
    terminate(Termination::Finalized);
  }

  void fail() {
    pending_.reset();
    terminate(Termination::Failed);
  }

  bool started() const { return started_; }
  InquiryStatus status() const { return status_; }
  Termination termination() const { return termination_; }
  DialogueMode mode() const { return mode_; }
  const SelectorConfig& config() const { return ctx_.config; }
  const std::optional<PendingQuestion>& pending() const { return pending_; }
  const Belief& belief() const { return belief_; }
  const Belief& initial_belief() const { return initial_; }
  const std::vector<TurnRecord>& turns() const { return turns_; }
  const std::vector<prompts::QaPair>& history() const { return history_; }
  const StructuredCase& current_case() const { return case_; }

 private:
  Belief updated_belief(const StructuredCase& updated, const std::vector<prompts::QaPair>& history) const {
    auto fresh = request_differential(ctx_, flatten(updated), history, belief_);
    if (!uses_bayes()) return fresh;
    auto posterior = bayes_update(belief_, fresh);
    auto scaled = temperature_scale(normalize(posterior), ctx_.config.temperature);
    return with_probabilities(std::move(posterior), scaled);
  }

  bool uses_bayes() const { return mode_ == DialogueMode::MedClarify || mode_ == DialogueMode::RandomQuestion; }

  void advance() {
    auto stop = should_stop(normalize(belief_), static_cast<int>(turns_.size()), ctx_.config);
    if (stop.stop()) {
      terminate(termination_for(stop.reason));
      return;
    }
    pending_ = propose();
    status_ = InquiryStatus::AwaitingAnswer;
  }

  PendingQuestion propose() {
    switch (mode_) {
      case DialogueMode::NaiveMultiTurn: {
        PromptRequest req{prompts::PromptRole::DoctorNaive, prompts::naive_doctor(flatten(case_), belief_, history_)};
        return {{detail::generate_question(ctx_, std::move(req), history_), QuestionKind::Naive, 0, 0, 0}, {}};
      }
      case DialogueMode::RandomQuestion: {
        std::vector<std::string> unasked;
        for (const auto& q : ctx_.question_bank)
          if (!detail::asked_before(q, history_)) unasked.push_back(q);
        if (!unasked.empty())
          return {{unasked[synthetic::uniform_index(rng_, unasked.size())], QuestionKind::Bank, 0, 0, 0}, {}};
        auto questions = build_question_set(belief_, case_, history_, ctx_);
        return {questions[synthetic::uniform_index(rng_, questions.size())], {}};
      }
      default: {
        auto scored = score_questions(build_question_set(belief_, case_, history_, ctx_), case_, history_, belief_, ctx_);
        PendingQuestion p{scored.questions[scored.selected], {}};
        for (std::size_t i = 0; i < scored.questions.size(); ++i)
          p.scores.push_back({scored.questions[i], scored.scores[i]});
        return p;
      }
    }
  }

  void terminate(Termination t) {
    termination_ = t;
    status_ = InquiryStatus::Terminated;
  }

  StructuredCase case_;
  DialogueMode mode_;
  InquiryContext ctx_;
  std::mt19937_64 rng_;
  bool started_ = false;
  InquiryStatus status_ = InquiryStatus::SelectingQuestion;
  Termination termination_ = Termination::None;
  Belief initial_;
  Belief belief_;
  std::optional<PendingQuestion> pending_;
  std::vector<TurnRecord> turns_;
  std::vector<prompts::QaPair> history_;
};

}  // namespace inquire
