#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "inquire/belief.hpp"
#include "inquire/text.hpp"

namespace inquire::prompts {

enum class PromptRole {
  Patient,
  DoctorDifferential,
  DoctorDiscriminatory,
  DoctorExploratory,
  DoctorNaive,
  Update,
  Evaluator,
};

inline constexpr PromptRole kAllRoles[] = {
    PromptRole::Patient,     PromptRole::DoctorDifferential, PromptRole::DoctorDiscriminatory,
    PromptRole::DoctorExploratory, PromptRole::DoctorNaive,  PromptRole::Update,
    PromptRole::Evaluator,
};

inline const char* to_string(PromptRole r) {
  switch (r) {
    case PromptRole::Patient: return "patient";
    case PromptRole::DoctorDifferential: return "doctor_differential";
    case PromptRole::DoctorDiscriminatory: return "doctor_discriminatory";
    case PromptRole::DoctorExploratory: return "doctor_exploratory";
    case PromptRole::DoctorNaive: return "doctor_naive";
    case PromptRole::Update: return "update";
    case PromptRole::Evaluator: return "evaluator";
  }
  return "?";
}

// Prompt boxes, verbatim. `{}` marks a positional slot.
inline constexpr std::string_view kDifferentialTemplate = R"prompt(Your goal is to give a differential diagnosis and assign each a confidence score [0.1 - 1] based on <Task> and further information from <Inquiries History> if there is.
Your diagnoses should be a specific disease name, not a general diagnosis. Try to rule out diseases in your previous <Differential Diagnosis> if possible.
Output a value of 0.9-1.0 if the disease is expected to be the correct diagnosis; 0.6-0.9 if it is a possible diagnosis; and below 0.6 if it is unlikely.

Here are some examples:
<Peripheral neuropathy> -> too general, <Guillain-Barre syndrome> -> specific
<Hemolytic anemia> --> too general, <Sickle Cell Disease> --> specific)prompt";

inline constexpr std::string_view kDiscriminatoryTemplate = R"prompt(Generate a question to help eliminate <Disease A> but confirm <Disease B> for <Patient Case>. 
The question should be bite-sized and not more than 1 sentence. Do not repeat the questions you have asked before in <Inquiries History> and <Questions>.
You are not allowed to reveal explicitly your diagnosis that you guessed.
<Patient Case>: {}
<Disease A>: {}
<Disease B>: {}
<Inquiries History>: {}
Output your answer concisely in the following format:

Thought:
[Your thought process here]

Response:
[Your question here])prompt";

inline constexpr std::string_view kExploratoryTemplate = R"prompt(Generate a question to discover other possible diseases apart from <Current Diagnosis> for <Patient Case>.
The question should be bite-sized and not more than 1 sentence. Do not repeat the questions you have asked before in <Inquiries History> and <Questions>.
You are not allowed to reveal explicitly your diagnosis that you guessed.
<Patient Case>: {}
<Current Diagnosis>: {}
<Inquiries History>: {}
Output your answer concisely in the following format:

Thought:
[Your thought process here]

Response:
[Your question here])prompt";

inline constexpr std::string_view kPatientTemplate = R"prompt(You are a patient who only answers the Doctor's <Question> based on your given conditions <Task>.
Things you must NOT do:
- Reveal your disease explicitly
- Give an answer that is not the fact based on your given conditions <Task>
- Have any bias in your answer

Here is an example:
**Example task**: She was a lifetime nonsmoker and reported no fevers, joint aches, eye pain, or rashes.

Doctor: "Do you smoke or have a history of smoking?"
Response: "No, I've never smoked."

Doctor: "Any recent fevers or chills?"
Response: "No fevers or chills."

Doctor: "Are you having any joint pain or stiffness?"
Response: "No joint aches or pain."

Doctor: "Any recent weight loss or night sweats?"
Response: "There is no information mentioned about weight loss or night sweats."

Output your answer concisely in the following format:

Response:
[Your answer here])prompt";

inline constexpr std::string_view kUpdateTemplate = R"prompt(Your task is to summarize the following question-answer pairs into a single string.
If the answer stated no information provided, only output "None" as your response; otherwise, output the summarized string.

{'Q: <Question1> A: <Answer1>', ...})prompt";

inline constexpr std::string_view kEvaluatorTemplate = R"prompt(Evaluate the following diagnosis for correctness compared to the given ground truth.
You should be evaluating only the given diagnosis; you should not attempt to solve the task.
Respond: "true" if the diagnoses is correct, and "false" if the diagnosis are incorrect.

Ground truth: {}
Diagnosis to evaluate: {})prompt";

inline constexpr std::string_view kNaiveDoctorTemplate = R"prompt(Your goal is to ask a question to rule out the <Differential diagnosis> based on <Task>.
The question should be bite-sized and not more than 1 sentence. Do not repeat the questions you have asked before in <Inquiries History>.
You are not allowed to ask directly if your diagnosis is correct or reveal your guess diagnosis explicitly.
Output your answer concisely in the following format:

Thought:
[Your thought process here]

Response:
[Your question here])prompt";

inline std::string_view template_text(PromptRole role) {
  switch (role) {
    case PromptRole::Patient: return kPatientTemplate;
    case PromptRole::DoctorDifferential: return kDifferentialTemplate;
    case PromptRole::DoctorDiscriminatory: return kDiscriminatoryTemplate;
    case PromptRole::DoctorExploratory: return kExploratoryTemplate;
    case PromptRole::DoctorNaive: return kNaiveDoctorTemplate;
    case PromptRole::Update: return kUpdateTemplate;
    case PromptRole::Evaluator: return kEvaluatorTemplate;
  }
  return {};
}

inline constexpr std::string_view kQaPairSlot = "{'Q: <Question1> A: <Answer1>', ...}";

// Fills `{}` slots left to right. Throws if the counts disagree.
inline std::string fill_slots(std::string_view tmpl, const std::vector<std::string>& values) {
  std::string out;
  std::size_t pos = 0, used = 0;
  while (true) {
    auto slot = tmpl.find("{}", pos);
    if (slot == std::string_view::npos) break;
    if (used == values.size()) throw std::logic_error("prompt template has more slots than values");
    out.append(tmpl.substr(pos, slot - pos));
    out += values[used++];
    pos = slot + 2;
  }
  if (used != values.size()) throw std::logic_error("prompt template has fewer slots than values");
  out.append(tmpl.substr(pos));
  return out;
}

struct QaPair {
  std::string question;
  std::string answer;

  bool operator==(const QaPair&) const = default;
};

inline std::string qa_string(const QaPair& qa) { return "Q: " + qa.question + " A: " + qa.answer; }

inline std::string render_history(const std::vector<QaPair>& history) {
  std::string out = "[";
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out += ", ";
    out += "'" + qa_string(history[i]) + "'";
  }
  return out + "]";
}

inline std::string format_confidence(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string render_differential(const Belief& b) {
  if (b.empty()) return "None";
  std::vector<std::string> parts;
  for (const auto& c : b.candidates) parts.push_back(c.name + " (" + format_confidence(c.confidence) + ")");
  return text::join(parts, ", ");
}

inline std::string render_names(const Belief& b) {
  std::vector<std::string> parts;
  for (const auto& c : b.candidates) parts.push_back(c.name);
  return text::join(parts, ", ");
}

inline std::string differential_format_instruction(std::size_t k) {
  return "Return exactly " + std::to_string(k) +
         " candidate diseases as a JSON array of objects with the keys \"disease\" and \"confidence\", "
         "for example [{\"disease\": \"<name>\", \"confidence\": 0.8}].";
}

inline std::string differential(const std::string& case_text, const std::vector<QaPair>& history,
                                const Belief& previous, std::size_t k) {
  std::string out(kDifferentialTemplate);
  out += "\n\n<Task>: " + case_text;
  out += "\n<Inquiries History>: " + render_history(history);
  out += "\n<Differential Diagnosis>: " + render_differential(previous);
  out += "\n\n" + differential_format_instruction(k);
  return out;
}

inline std::string discriminatory(const std::string& case_text, const std::string& disease_a,
                                  const std::string& disease_b, const std::vector<QaPair>& history) {
  return fill_slots(kDiscriminatoryTemplate, {case_text, disease_a, disease_b, render_history(history)});
}

inline std::string exploratory(const std::string& case_text, const Belief& current,
                               const std::vector<QaPair>& history) {
  return fill_slots(kExploratoryTemplate, {case_text, render_names(current), render_history(history)});
}

inline std::string naive_doctor(const std::string& case_text, const Belief& current,
                                const std::vector<QaPair>& history) {
  std::string out(kNaiveDoctorTemplate);
  out += "\n\n<Task>: " + case_text;
  out += "\n<Differential diagnosis>: " + render_differential(current);
  out += "\n<Inquiries History>: " + render_history(history);
  return out;
}

inline std::string patient(const std::string& full_case_text, const std::string& question) {
  std::string out(kPatientTemplate);
  out += "\n\n<Task>: " + full_case_text;
  out += "\n<Question>: " + question;
  return out;
}

inline std::string update(const QaPair& qa) {
  std::string out(kUpdateTemplate);
  text::replace_all(out, kQaPairSlot, "{'" + qa_string(qa) + "'}");
  return out;
}

inline std::string evaluator(const std::string& ground_truth, const std::string& diagnosis) {
  return fill_slots(kEvaluatorTemplate, {ground_truth, diagnosis});
}

// Sentence appended to the case when simulating a hypothetical answer.
inline std::string hypothetical_answer(const std::string& question, bool yes) {
  return "In response to: '" + question + "' — the patient answered " + (yes ? "yes." : "no.");
}

inline std::string repair_suffix() {
  return "\n\nYour previous response could not be parsed. Respond with only the JSON array.";
}

inline std::string regenerate_suffix(const std::string& duplicate) {
  return "\n\nThe question \"" + duplicate + "\" was already asked. Generate a different question.";
}

}  // namespace inquire::prompts
