#pragma once

#include <string>

#include "support.hpp"

namespace testing_support {

// Fixed slot values used to produce tests/golden/<role>.txt.
inline std::string render_golden(inquire::prompts::PromptRole role) {
  using inquire::prompts::PromptRole;
  namespace prompts = inquire::prompts;
  const std::string question = "Does the pain get better when you lean forward?";
  const std::string answer = "Yes, leaning forward eases it.";
  auto c = inquire::flatten(fixture_case().patient);
  std::vector<prompts::QaPair> history{{question, answer}};
  auto diff = belief({{"Acute pericarditis", 0.8}, {"Myocardial infarction", 0.6}, {"Pulmonary embolism", 0.3}});
  switch (role) {
    case PromptRole::DoctorDifferential: return prompts::differential(c, history, diff, 5);
    case PromptRole::DoctorDiscriminatory:
      return prompts::discriminatory(c, "Myocardial infarction", "Acute pericarditis", history);
    case PromptRole::DoctorExploratory: return prompts::exploratory(c, diff, history);
    case PromptRole::DoctorNaive: return prompts::naive_doctor(c, diff, history);
    case PromptRole::Patient: return prompts::patient(c, "Have you had a fever recently?");
    case PromptRole::Update: return prompts::update({question, answer});
    case PromptRole::Evaluator: return prompts::evaluator("Acute pericarditis", "Pericarditis");
  }
  return {};
}

inline std::string golden_file(inquire::prompts::PromptRole role) {
  return slurp(source_path(std::string("tests/golden/") + inquire::prompts::to_string(role) + ".txt"));
}

}  // namespace testing_support
