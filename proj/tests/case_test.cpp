#include <gtest/gtest.h>

#include "support.hpp"

using namespace inquire;

TEST(CaseParse, Fixture) {
  auto r = testing_support::fixture_case();
  EXPECT_EQ(r.case_id, "chest-pain-44m");
  EXPECT_EQ(r.ground_truth, "Acute pericarditis");
  EXPECT_EQ(r.patient.demographics, "44-year-old man");
  EXPECT_EQ(r.patient.primary_symptom, "sudden chest pain");
  EXPECT_TRUE(r.patient.social_history.empty());
  EXPECT_EQ(r.patient.physical_examination.size(), 3u);
  EXPECT_EQ(r.patient.other_tests, std::vector<std::string>{"An ECG is performed"});
}

TEST(CaseParse, Errors) {
  EXPECT_THROW(parse_case("{}"), MalformedCase);
  EXPECT_THROW(parse_case("{not json"), ParseError);
  EXPECT_THROW(parse_case(R"({"Patient_Case": {"Patient_Information": {"Demographics": "x"}}})"), MalformedCase);
}

TEST(CaseParse, UnknownKeysWarn) {
  std::vector<std::string> warnings;
  parse_case(
      R"({"Patient_Case": {"Patient_Information": {"Demographics": "30F", "Mood": "ok",
          "Symptoms": {"Primary_Symptom": "cough"}}}})",
      warnings);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("Mood"), std::string::npos);
  EXPECT_NE(warnings[1].find("ground_truth"), std::string::npos);
}

TEST(CaseParse, SyntheticRoundTrip) {
  auto w = testing_support::world("benchmark16");
  auto corpus = synthetic::generate_corpus(w, 3, 5);
  for (const auto& c : corpus) {
    auto back = parse_case(to_json(c).dump());
    EXPECT_EQ(back.case_id, c.case_id);
    EXPECT_EQ(back.ground_truth, c.ground_truth);
    EXPECT_EQ(back.patient, c.patient);
  }
}

TEST(Masking, SingleLab) {
  auto c = testing_support::fixture_case().patient;
  auto m = mask_single(c, FeatureCategory::LaboratoryTests);
  EXPECT_TRUE(m.laboratory_findings.empty());
  EXPECT_TRUE(m.other_tests.empty());
  EXPECT_EQ(m.physical_examination, c.physical_examination);
  EXPECT_EQ(mask_single(m, FeatureCategory::LaboratoryTests), m);
  EXPECT_EQ(mask_single(c, FeatureCategory::SocialHistory), c);
}

TEST(Masking, All) {
  auto c = testing_support::fixture_case().patient;
  auto m = mask_all(c);
  StructuredCase expected;
  expected.demographics = "44-year-old man";
  expected.primary_symptom = "sudden chest pain";
  EXPECT_EQ(m, expected);
  EXPECT_EQ(mask_all(m), m);
}

TEST(Masking, ParseModes) {
  EXPECT_EQ(to_string(parse_mask_mode("lab")), "lab");
  EXPECT_EQ(to_string(parse_mask_mode("all")), "all");
  EXPECT_THROW(parse_mask_mode("everything"), ConfigError);
}

TEST(Evidence, Append) {
  auto c = testing_support::fixture_case().patient;
  auto d = append_evidence(c, "No fevers or chills.");
  EXPECT_EQ(d.acquired_evidence.size(), c.acquired_evidence.size() + 1);
  EXPECT_THROW(append_evidence(c, "None"), RejectedEvidence);
  EXPECT_THROW(append_evidence(c, "  "), RejectedEvidence);
}

TEST(Flatten, Deterministic) {
  auto c = testing_support::fixture_case().patient;
  EXPECT_EQ(flatten(c), flatten(c));
  EXPECT_EQ(flatten(mask_all(c)), "Demographics: 44-year-old man\nPrimary symptom: sudden chest pain");
}
