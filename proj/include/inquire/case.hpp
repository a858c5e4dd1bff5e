#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "inquire/error.hpp"
#include "inquire/text.hpp"

namespace inquire {

// A patient case split into the demographics/primary-symptom core and the
// six maskable feature categories. Field layout mirrors the structured JSON
// the cases are stored in.
struct StructuredCase {
  std::string demographics;
  std::string primary_symptom;
  std::vector<std::string> secondary_symptoms;
  std::vector<std::string> history;
  std::string review_of_systems;
  std::string past_medical_history;
  std::string social_history;
  std::vector<std::string> physical_examination;
  std::vector<std::string> laboratory_findings;
  std::vector<std::string> imaging_results;
  std::vector<std::string> other_tests;
  std::vector<std::string> acquired_evidence;

  bool operator==(const StructuredCase&) const = default;
};

enum class FeatureCategory {
  Symptoms,
  SocialHistory,
  PastMedicalHistory,
  PhysicalExamination,
  LaboratoryTests,
  ImagingResults,
};

inline constexpr std::array<FeatureCategory, 6> kAllCategories = {
    FeatureCategory::Symptoms,           FeatureCategory::SocialHistory,
    FeatureCategory::PastMedicalHistory, FeatureCategory::PhysicalExamination,
    FeatureCategory::LaboratoryTests,    FeatureCategory::ImagingResults,
};

inline const char* to_string(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::Symptoms: return "symptoms";
    case FeatureCategory::SocialHistory: return "social";
    case FeatureCategory::PastMedicalHistory: return "pmh";
    case FeatureCategory::PhysicalExamination: return "exam";
    case FeatureCategory::LaboratoryTests: return "lab";
    case FeatureCategory::ImagingResults: return "imaging";
  }
  return "?";
}

inline std::optional<FeatureCategory> category_from_string(std::string_view s) {
  for (auto c : kAllCategories)
    if (s == to_string(c)) return c;
  return std::nullopt;
}

// Masking strategy as accepted on the command line: none, all, or one
// category.
struct MaskMode {
  enum class Kind { None, All, Single } kind = Kind::None;
  FeatureCategory category = FeatureCategory::Symptoms;

  static MaskMode none() { return {}; }
  static MaskMode all() { return {Kind::All, FeatureCategory::Symptoms}; }
  static MaskMode single(FeatureCategory c) { return {Kind::Single, c}; }

  bool operator==(const MaskMode&) const = default;
};

inline std::string to_string(const MaskMode& m) {
  switch (m.kind) {
    case MaskMode::Kind::None: return "none";
    case MaskMode::Kind::All: return "all";
    case MaskMode::Kind::Single: return to_string(m.category);
  }
  return "none";
}

inline MaskMode parse_mask_mode(std::string_view s) {
  if (s == "none") return MaskMode::none();
  if (s == "all") return MaskMode::all();
  if (auto c = category_from_string(s)) return MaskMode::single(*c);
  throw ConfigError("unknown mask mode '" + std::string(s) +
                    "' (expected none|all|symptoms|social|pmh|exam|lab|imaging)");
}

struct CaseRecord {
  StructuredCase patient;
  std::string ground_truth;
  std::string dataset_tag;
  std::optional<std::string> specialty_tag;
  std::string case_id;

  bool operator==(const CaseRecord&) const = default;
};

// Symptoms covers secondary symptoms, history and review of systems; the
// primary symptom is never masked.
inline StructuredCase mask_single(StructuredCase c, FeatureCategory category) {
  switch (category) {
    case FeatureCategory::Symptoms:
      c.secondary_symptoms.clear();
      c.history.clear();
      c.review_of_systems.clear();
      break;
    case FeatureCategory::SocialHistory:
      c.social_history.clear();
      break;
    case FeatureCategory::PastMedicalHistory:
      c.past_medical_history.clear();
      break;
    case FeatureCategory::PhysicalExamination:
      c.physical_examination.clear();
      break;
    case FeatureCategory::LaboratoryTests:
      c.laboratory_findings.clear();
      c.other_tests.clear();
      break;
    case FeatureCategory::ImagingResults:
      c.imaging_results.clear();
      break;
  }
  return c;
}

inline StructuredCase mask_all(const StructuredCase& c) {
  StructuredCase out;
  out.demographics = c.demographics;
  out.primary_symptom = c.primary_symptom;
  return out;
}

inline StructuredCase apply_mask(const StructuredCase& c, const MaskMode& mode) {
  switch (mode.kind) {
    case MaskMode::Kind::None: return c;
    case MaskMode::Kind::All: return mask_all(c);
    case MaskMode::Kind::Single: return mask_single(c, mode.category);
  }
  return c;
}

inline bool is_null_evidence(std::string_view sentence) {
  std::string t = text::trim(sentence);
  while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.erase(t.begin());
  while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == '.')) t.pop_back();
  return text::lower(t) == "none";
}

inline StructuredCase append_evidence(StructuredCase c, std::string_view sentence) {
  std::string s = text::trim(sentence);
  if (s.empty()) throw RejectedEvidence("empty evidence sentence");
  if (is_null_evidence(s)) throw RejectedEvidence("non-informative answer ('None')");
  c.acquired_evidence.push_back(std::move(s));
  return c;
}

// Deterministic prompt text. Empty fields are omitted.
inline std::string flatten(const StructuredCase& c) {
  std::string out;
  auto line = [&out](std::string_view label, const std::string& value) {
    if (value.empty()) return;
    out += label;
    out += ": ";
    out += value;
    out += '\n';
  };
  auto list = [&line](std::string_view label, const std::vector<std::string>& v) {
    line(label, text::join(v, "; "));
  };
  line("Demographics", c.demographics);
  line("Primary symptom", c.primary_symptom);
  list("Secondary symptoms", c.secondary_symptoms);
  list("History", c.history);
  line("Review of systems", c.review_of_systems);
  line("Past medical history", c.past_medical_history);
  line("Social history", c.social_history);
  list("Physical examination", c.physical_examination);
  list("Laboratory findings", c.laboratory_findings);
  list("Imaging results", c.imaging_results);
  list("Other tests", c.other_tests);
  list("Acquired evidence", c.acquired_evidence);
  if (!out.empty()) out.pop_back();
  return out;
}

namespace detail {

inline std::string as_text(const nlohmann::json& j, std::string_view key,
                           std::vector<std::string>& warnings) {
  if (j.is_null()) return {};
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : j)
      if (e.is_string() && !e.get<std::string>().empty()) parts.push_back(e.get<std::string>());
    return text::join(parts, " ");
  }
  warnings.push_back("field '" + std::string(key) + "' has unexpected type; treated as empty");
  return {};
}

inline std::vector<std::string> as_list(const nlohmann::json& j, std::string_view key,
                                        std::vector<std::string>& warnings) {
  std::vector<std::string> out;
  if (j.is_null()) return out;
  if (j.is_string()) {
    if (!j.get<std::string>().empty()) out.push_back(j.get<std::string>());
    return out;
  }
  if (j.is_array()) {
    for (const auto& e : j) {
      if (e.is_string())
        out.push_back(e.get<std::string>());
      else
        warnings.push_back("non-string entry in '" + std::string(key) + "' skipped");
    }
    return out;
  }
  warnings.push_back("field '" + std::string(key) + "' has unexpected type; treated as empty");
  return out;
}

inline void warn_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                         std::string_view where, std::vector<std::string>& warnings) {
  if (!obj.is_object()) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) warnings.push_back("unknown key '" + std::string(where) + it.key() + "' ignored");
  }
}

inline const nlohmann::json& at_or_null(const nlohmann::json& obj, const char* key) {
  static const nlohmann::json null_json;
  if (!obj.is_object()) return null_json;
  auto it = obj.find(key);
  return it == obj.end() ? null_json : *it;
}

}  // namespace detail

inline nlohmann::json case_to_json(const StructuredCase& c) {
  using nlohmann::json;
  return json{
      {"Patient_Information",
       {{"Demographics", c.demographics},
        {"History", c.history},
        {"Symptoms",
         {{"Primary_Symptom", c.primary_symptom}, {"Secondary_Symptoms", c.secondary_symptoms}}},
        {"Past_Medical_History", c.past_medical_history},
        {"Social_History", c.social_history},
        {"Review_of_Systems", c.review_of_systems}}},
      {"Physical_Examination", c.physical_examination},
      {"Test_Results",
       {{"Laboratory_Findings", c.laboratory_findings},
        {"Imaging_Results", c.imaging_results},
        {"Other", c.other_tests}}},
      {"Acquired_Evidence", c.acquired_evidence},
  };
}

// Parses the `Patient_Case` object. Throws MalformedCase when demographics or
// the primary symptom is missing or empty.
inline StructuredCase case_from_json(const nlohmann::json& pc, std::vector<std::string>& warnings) {
  using detail::as_list;
  using detail::as_text;
  using detail::at_or_null;
  if (!pc.is_object()) throw MalformedCase("Patient_Case must be an object");

  detail::warn_unknown(pc, {"Patient_Information", "Physical_Examination", "Test_Results", "Acquired_Evidence"},
                       "Patient_Case.", warnings);
  const auto& info = at_or_null(pc, "Patient_Information");
  detail::warn_unknown(info,
                       {"Demographics", "History", "Symptoms", "Past_Medical_History", "Social_History",
                        "Review_of_Systems"},
                       "Patient_Information.", warnings);
  const auto& symptoms = at_or_null(info, "Symptoms");
  detail::warn_unknown(symptoms, {"Primary_Symptom", "Secondary_Symptoms"}, "Symptoms.", warnings);
  const auto& tests = at_or_null(pc, "Test_Results");
  detail::warn_unknown(tests, {"Laboratory_Findings", "Imaging_Results", "Other"}, "Test_Results.", warnings);

  StructuredCase c;
  c.demographics = text::trim(as_text(at_or_null(info, "Demographics"), "Demographics", warnings));
  c.primary_symptom = text::trim(as_text(at_or_null(symptoms, "Primary_Symptom"), "Primary_Symptom", warnings));
  if (c.demographics.empty()) throw MalformedCase("missing Patient_Information.Demographics");
  if (c.primary_symptom.empty()) throw MalformedCase("missing Symptoms.Primary_Symptom");

  c.secondary_symptoms = as_list(at_or_null(symptoms, "Secondary_Symptoms"), "Secondary_Symptoms", warnings);
  c.history = as_list(at_or_null(info, "History"), "History", warnings);
  c.review_of_systems = as_text(at_or_null(info, "Review_of_Systems"), "Review_of_Systems", warnings);
  c.past_medical_history = as_text(at_or_null(info, "Past_Medical_History"), "Past_Medical_History", warnings);
  c.social_history = as_text(at_or_null(info, "Social_History"), "Social_History", warnings);
  c.physical_examination = as_list(at_or_null(pc, "Physical_Examination"), "Physical_Examination", warnings);
  c.laboratory_findings = as_list(at_or_null(tests, "Laboratory_Findings"), "Laboratory_Findings", warnings);
  c.imaging_results = as_list(at_or_null(tests, "Imaging_Results"), "Imaging_Results", warnings);
  c.other_tests = as_list(at_or_null(tests, "Other"), "Other", warnings);
  c.acquired_evidence = as_list(at_or_null(pc, "Acquired_Evidence"), "Acquired_Evidence", warnings);
  return c;
}

inline nlohmann::json to_json(const CaseRecord& r) {
  nlohmann::json j{
      {"case_id", r.case_id},
      {"ground_truth", r.ground_truth},
      {"dataset", r.dataset_tag},
      {"Patient_Case", case_to_json(r.patient)},
  };
  if (r.specialty_tag) j["specialty"] = *r.specialty_tag;
  return j;
}

inline CaseRecord case_record_from_json(const nlohmann::json& j, std::vector<std::string>& warnings) {
  if (!j.is_object()) throw MalformedCase("case record must be a JSON object");
  detail::warn_unknown(j, {"case_id", "ground_truth", "dataset", "specialty", "Patient_Case"}, "", warnings);
  auto pc = j.find("Patient_Case");
  if (pc == j.end()) throw MalformedCase("missing Patient_Case");

  CaseRecord r;
  r.patient = case_from_json(*pc, warnings);
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
  };
  r.case_id = str("case_id");
  r.ground_truth = text::trim(str("ground_truth"));
  r.dataset_tag = str("dataset");
  if (auto it = j.find("specialty"); it != j.end() && it->is_string()) r.specialty_tag = it->get<std::string>();
  if (r.ground_truth.empty()) warnings.push_back("case has no ground_truth");
  return r;
}

inline CaseRecord parse_case(std::string_view raw, std::vector<std::string>& warnings) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid case JSON: ") + e.what());
  }
  return case_record_from_json(j, warnings);
}

inline CaseRecord parse_case(std::string_view raw) {
  std::vector<std::string> warnings;
  return parse_case(raw, warnings);
}

inline std::string serialize(const CaseRecord& r) { return to_json(r).dump(); }

}  // namespace inquire
