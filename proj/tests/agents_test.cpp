#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace inquire;
using testing_support::ScriptedProvider;

namespace {

StructuredCase nonsmoker() {
  StructuredCase c;
  c.demographics = "61-year-old woman";
  c.primary_symptom = "dry cough";
  c.social_history = "She was a lifetime nonsmoker and reported no fevers, joint aches, eye pain, or rashes.";
  return c;
}

}  // namespace

TEST(Patient, ReturnsParsedResponse) {
  ScriptedProvider p;
  std::string seen;
  p.handlers[prompts::PromptRole::Patient] = [&](const PromptRequest& r) {
    seen = r.text;
    return std::string("Response:\n\"No, I've never smoked.\"");
  };
  auto a = patient_answer(nonsmoker(), "Do you smoke or have a history of smoking?", p, {}, 42);
  EXPECT_EQ(a, "No, I've never smoked.");
  EXPECT_NE(seen.find("lifetime nonsmoker"), std::string::npos);
  EXPECT_NE(seen.find("<Question>: Do you smoke or have a history of smoking?"), std::string::npos);
}

TEST(Patient, SyntheticOracleAnswers) {
  auto w = testing_support::world("noiseless8");
  synthetic::SyntheticProvider p(w);
  std::mt19937_64 rng(1);
  auto rec = synthetic::make_case(w, 5, rng, "c1");
  for (std::size_t f = 0; f < w.feature_count(); ++f) {
    auto a = text::lower(patient_answer(rec.patient, w.feature_questions[f], p, {}, 42));
    EXPECT_EQ(a.starts_with("yes"), w.diseases[5].features[f]) << a;
  }
  auto none = patient_answer(rec.patient, "Any recent weight loss or night sweats?", p, {}, 42);
  EXPECT_TRUE(none.starts_with("There is no information mentioned about")) << none;
}

TEST(Update, InformativeAnswerAppends) {
  ScriptedProvider p;
  p.handlers[prompts::PromptRole::Update] = [](const PromptRequest&) {
    return std::string("{'The patient reports no fevers or chills.'}");
  };
  auto u = update_case(nonsmoker(), "Any fevers?", "No fevers or chills.", p, {}, 42);
  ASSERT_TRUE(u.evidence);
  EXPECT_EQ(*u.evidence, "The patient reports no fevers or chills.");
  EXPECT_EQ(u.patient_case.acquired_evidence.back(), *u.evidence);
}

TEST(Update, UninformativeAnswerLeavesCase) {
  ScriptedProvider p;
  p.handlers[prompts::PromptRole::Update] = [](const PromptRequest&) { return std::string("Response: \"None\""); };
  auto c = nonsmoker();
  auto u = update_case(c, "Any rash?", "I am not sure", p, {}, 42);
  EXPECT_FALSE(u.evidence);
  EXPECT_EQ(u.patient_case, c);
}

TEST(Update, SyntheticFiltersNoInformation) {
  synthetic::SyntheticProvider p(testing_support::world("noiseless8"));
  auto u = update_case(nonsmoker(), "Any rash?", std::string(synthetic::kNoInformation), p, {}, 42);
  EXPECT_FALSE(u.evidence);
}

TEST(Evaluator, SyntheticVerdicts) {
  auto idx = icd::load_index(testing_support::source_path("data/icd/icd_index.json"));
  synthetic::SyntheticProvider p(testing_support::world("noiseless8"), idx);
  EXPECT_TRUE(evaluate_diagnosis("acute pericarditis", "Acute Pericarditis", p, {}, 42));
  EXPECT_FALSE(evaluate_diagnosis("acute pericarditis", "myocardial infarction", p, {}, 42));
  EXPECT_TRUE(evaluate_diagnosis("Acute pericarditis", "Pericarditis", p, {}, 42));
  EXPECT_FALSE(evaluate_diagnosis("", "Pericarditis", p, {}, 42));
}

TEST(Evaluator, ParsesVerdictText) {
  EXPECT_TRUE(parse_verdict("true"));
  EXPECT_TRUE(parse_verdict("Response: \"True\""));
  EXPECT_FALSE(parse_verdict("false"));
}

TEST(ResponseParsing, DifferentialVariants) {
  auto a = parse_differential("Thought: hmm\n```json\n[{\"disease\": \"A\", \"confidence\": 0.9}]\n```");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].name, "A");
  EXPECT_THROW(parse_differential("no list here"), MalformedDifferential);
  EXPECT_EQ(parse_response_field("Thought:\nx\n\nResponse:\n[Any fever?]"), "Any fever?");
}

TEST(SyntheticPosterior, UniformWithoutFacts) {
  auto w = synthetic::generate_world(5, 3, 0.0, 2);
  auto b = synthetic::synthetic_posterior(w, {}, 5);
  ASSERT_EQ(b.size(), 5u);
  for (const auto& c : b.candidates) EXPECT_NEAR(c.confidence, 0.2, 1e-15);
}

TEST(SyntheticPosterior, PointMassWhenPinned) {
  auto w = testing_support::world("noiseless8");
  std::set<synthetic::Fact> facts;
  for (std::size_t f = 0; f < w.feature_count(); ++f) facts.insert({f, w.diseases[3].features[f]});
  auto b = synthetic::synthetic_posterior(w, facts, 5);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.candidates[0].name, w.diseases[3].name);
}

TEST(SyntheticPosterior, NineToOneRatio) {
  synthetic::World w;
  w.noise = 0.1;
  w.feature_questions = {"Is F1 present?"};
  w.diseases = {{"A", 1, {true}}, {"B", 2, {false}}};
  auto p = synthetic::posterior_probabilities(w, {{0, true}});
  EXPECT_NEAR(p[0] / p[1], 9.0, 1e-12);
}
