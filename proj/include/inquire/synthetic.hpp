#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "inquire/belief.hpp"
#include "inquire/case.hpp"
#include "inquire/error.hpp"
#include "inquire/icd.hpp"
#include "inquire/prompts.hpp"
#include "inquire/provider.hpp"
#include "inquire/text.hpp"

namespace inquire::synthetic {

// A desk-scale diagnostic world: diseases described by binary features, each
// feature observable through one yes/no question. Patients report a feature
// wrongly with probability `noise`.
struct Disease {
  std::string name;
  int chapter = 0;
  std::vector<bool> features;

  bool operator==(const Disease&) const = default;
};

struct World {
  std::vector<Disease> diseases;
  std::vector<std::string> feature_questions;
  double noise = 0.0;

  std::size_t feature_count() const { return feature_questions.size(); }

  std::optional<std::size_t> feature_for_question(std::string_view question) const {
    auto q = text::trim(question);
    for (std::size_t j = 0; j < feature_questions.size(); ++j)
      if (feature_questions[j] == q) return j;
    return std::nullopt;
  }

  std::optional<std::size_t> disease_index(std::string_view name) const {
    auto key = text::canonical_name(name);
    for (std::size_t i = 0; i < diseases.size(); ++i)
      if (text::canonical_name(diseases[i].name) == key) return i;
    return std::nullopt;
  }
};

inline void validate(const World& w) {
  if (w.diseases.empty()) throw InvalidWorld("world has no diseases");
  if (w.feature_questions.empty()) throw InvalidWorld("world has no feature questions");
  if (!(w.noise >= 0.0 && w.noise < 0.5)) throw InvalidWorld("noise must lie in [0, 0.5)");
  std::unordered_set<std::string> names;
  for (const auto& d : w.diseases) {
    if (text::trim(d.name).empty()) throw InvalidWorld("disease with empty name");
    if (!names.insert(text::canonical_name(d.name)).second) throw InvalidWorld("duplicate disease name " + d.name);
    if (d.features.size() != w.feature_count())
      throw InvalidWorld("disease " + d.name + " has " + std::to_string(d.features.size()) + " features, expected " +
                         std::to_string(w.feature_count()));
  }
  for (std::size_t a = 0; a < w.feature_questions.size(); ++a) {
    if (text::trim(w.feature_questions[a]).empty()) throw InvalidWorld("empty feature question");
    for (std::size_t b = 0; b < w.feature_questions.size(); ++b)
      if (a != b && w.feature_questions[b].find(w.feature_questions[a]) != std::string::npos)
        throw InvalidWorld("feature question '" + w.feature_questions[a] + "' is contained in another question");
  }
}

inline nlohmann::json to_json(const World& w) {
  auto diseases = nlohmann::json::array();
  for (const auto& d : w.diseases)
    diseases.push_back({{"name", d.name}, {"chapter", d.chapter}, {"features", d.features}});
  return {{"diseases", diseases}, {"feature_questions", w.feature_questions}, {"noise", w.noise}};
}

inline World world_from_json(const nlohmann::json& j) {
  World w;
  try {
    for (const auto& d : j.at("diseases"))
      w.diseases.push_back({d.at("name").get<std::string>(), d.value("chapter", 0), d.at("features").get<std::vector<bool>>()});
    w.feature_questions = j.at("feature_questions").get<std::vector<std::string>>();
    w.noise = j.value("noise", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidWorld(std::string("malformed world file: ") + e.what());
  }
  validate(w);
  return w;
}

inline World load_world(const std::string& path) { return world_from_json(icd::read_json_file(path)); }

// Offline terminology index covering the world's diseases.
inline icd::IcdIndex world_index(const World& w) {
  icd::IcdIndex idx;
  for (std::size_t i = 0; i < w.diseases.size(); ++i) {
    std::string code = "SYN" + std::to_string(i + 1);
    idx.add(w.diseases[i].name, code, w.diseases[i].chapter);
  }
  return idx;
}

struct Fact {
  std::size_t feature = 0;
  bool present = false;

  auto operator<=>(const Fact&) const = default;
};

// Everything the synthetic doctor can read off a prompt: reported facts,
// hypothetical answers being simulated, and which questions were mentioned.
struct Observations {
  std::set<Fact> facts;
  std::set<Fact> hypothetical;
  std::vector<bool> mentioned;

  bool any_unmentioned() const { return std::find(mentioned.begin(), mentioned.end(), false) != mentioned.end(); }
};

namespace detail {

// "Yes"/"No" token followed by a terminator, so that answers such as
// "No information ..." are not read as a negative finding.
inline std::optional<bool> leading_answer(std::string_view s) {
  auto terminated = [&s](std::size_t n) {
    if (s.size() == n) return true;
    char c = s[n];
    return c == '.' || c == ',' || c == '!' || c == '\'' || c == '"' || c == '\n' || c == ';';
  };
  if (text::starts_with_icase(s, "yes") && terminated(3)) return true;
  if (text::starts_with_icase(s, "no") && terminated(2)) return false;
  return std::nullopt;
}

}  // namespace detail

inline Observations observe(const World& w, std::string_view text) {
  Observations obs;
  obs.mentioned.assign(w.feature_count(), false);
  static constexpr std::string_view kAnswerMarker = " A: ";
  static constexpr std::string_view kHypoMarker = "' — the patient answered ";
  for (std::size_t j = 0; j < w.feature_count(); ++j) {
    const auto& q = w.feature_questions[j];
    for (auto pos = text.find(q); pos != std::string_view::npos; pos = text.find(q, pos + 1)) {
      obs.mentioned[j] = true;
      auto rest = text.substr(pos + q.size());
      if (rest.substr(0, kAnswerMarker.size()) == kAnswerMarker) {
        if (auto v = detail::leading_answer(rest.substr(kAnswerMarker.size()))) obs.facts.insert({j, *v});
      } else if (rest.substr(0, kHypoMarker.size()) == kHypoMarker) {
        if (auto v = detail::leading_answer(rest.substr(kHypoMarker.size()))) obs.hypothetical.insert({j, *v});
      }
    }
  }
  return obs;
}

// Exact posterior over all diseases under a uniform prior and independent
// feature reports (agreement 1 - noise, disagreement noise).
inline std::vector<double> posterior_probabilities(const World& w, const std::set<Fact>& facts) {
  std::vector<double> weights(w.diseases.size(), 1.0);
  for (std::size_t i = 0; i < w.diseases.size(); ++i)
    for (const auto& f : facts)
      weights[i] *= w.diseases[i].features.at(f.feature) == f.present ? 1.0 - w.noise : w.noise;
  double total = 0.0;
  for (double v : weights) total += v;
  if (!(total > 0.0)) throw InconsistentEvidence("no disease in the world is consistent with the reported facts");
  for (auto& v : weights) v /= total;
  return weights;
}

// Top-k differential from the exact posterior. Zero-probability diseases are
// excluded; confidences are floored at 0.1 as on any ingested differential.
inline Belief synthetic_posterior(const World& w, const std::set<Fact>& facts, std::size_t k) {
  auto probs = posterior_probabilities(w, facts);
  std::vector<Candidate> cs;
  for (std::size_t i = 0; i < w.diseases.size(); ++i) {
    if (!(probs[i] > 0.0)) continue;
    cs.push_back({w.diseases[i].name, "SYN" + std::to_string(i + 1), ChapterId::of(w.diseases[i].chapter), probs[i]});
  }
  sort_candidates(cs);
  if (cs.size() > k) cs.resize(k);
  for (auto& c : cs) c.confidence = std::max(c.confidence, kConfidenceFloor);
  return Belief{std::move(cs), 0};
}

inline constexpr std::string_view kNoInformation = "There is no information mentioned about that.";

// Plays every agent role deterministically from the rendered prompt text.
// Holds only the world model; it never sees a case's ground truth unless the
// prompt itself carries it (Evaluator).
class SyntheticProvider final : public Provider {
 public:
  explicit SyntheticProvider(World world, std::optional<icd::IcdIndex> synonyms = std::nullopt)
      : world_(std::move(world)), index_(synonyms ? std::move(*synonyms) : world_index(world_)) {
    validate(world_);
  }

  const World& world() const { return world_; }

  ProviderIdentity identity() const override { return {"synthetic", "exact-bayes"}; }

  std::string complete(const PromptRequest& request, const DecodingParams&, std::uint64_t) const override {
    using prompts::PromptRole;
    switch (request.role) {
      case PromptRole::DoctorDifferential: return differential(request.text);
      case PromptRole::DoctorDiscriminatory: return discriminatory(request.text);
      case PromptRole::DoctorExploratory: return exploratory(request.text);
      case PromptRole::DoctorNaive: return naive(request.text);
      case PromptRole::Patient: return patient(request.text);
      case PromptRole::Update: return update(request.text);
      case PromptRole::Evaluator: return evaluator(request.text);
    }
    throw ProviderFailure("unsupported prompt role", false);
  }

 private:
  static std::string field_line(std::string_view text, std::string_view label) {
    auto pos = text.rfind(label);
    if (pos == std::string_view::npos) return {};
    auto start = pos + label.size();
    auto end = text.find('\n', start);
    return text::trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
  }

  static std::string as_question_response(const std::string& thought, const std::string& question) {
    return "Thought:\n" + thought + "\n\nResponse:\n" + question;
  }

  std::string differential(const std::string& text) const {
    auto obs = observe(world_, text);
    std::size_t k = 5;
    static constexpr std::string_view kMarker = "Return exactly ";
    if (auto pos = text.rfind(kMarker); pos != std::string::npos) k = std::stoul(text.substr(pos + kMarker.size()));

    std::set<Fact> combined = obs.facts;
    combined.insert(obs.hypothetical.begin(), obs.hypothetical.end());
    Belief b;
    try {
      b = synthetic_posterior(world_, combined, k);
    } catch (const InconsistentEvidence&) {
      // The hypothetical contradicts what is already known.
      b = synthetic_posterior(world_, obs.facts, k);
    }
    auto arr = nlohmann::json::array();
    for (const auto& c : b.candidates) arr.push_back({{"disease", c.name}, {"confidence", c.confidence}});
    return arr.dump();
  }

  // Lowest unmentioned feature satisfying `pred`, else lowest unmentioned,
  // else lowest satisfying `pred` at all, else feature 0.
  template <class Pred>
  std::size_t pick_feature(const Observations& obs, Pred pred) const {
    const auto n = world_.feature_count();
    for (std::size_t j = 0; j < n; ++j)
      if (!obs.mentioned[j] && pred(j)) return j;
    for (std::size_t j = 0; j < n; ++j)
      if (!obs.mentioned[j]) return j;
    for (std::size_t j = 0; j < n; ++j)
      if (pred(j)) return j;
    return 0;
  }

  std::string discriminatory(const std::string& text) const {
    auto obs = observe(world_, text);
    auto a = world_.disease_index(field_line(text, "<Disease A>: "));
    auto b = world_.disease_index(field_line(text, "<Disease B>: "));
    auto separates = [&](std::size_t f) {
      return a && b && world_.diseases[*a].features[f] != world_.diseases[*b].features[f];
    };
    auto j = pick_feature(obs, separates);
    // Among the separating findings, the one whose answer is least
    // predictable given what the case already shows.
    std::vector<double> probs;
    try {
      probs = posterior_probabilities(world_, obs.facts);
    } catch (const InconsistentEvidence&) {
      probs.assign(world_.diseases.size(), 1.0 / static_cast<double>(world_.diseases.size()));
    }
    double best = 2.0;
    for (std::size_t f = 0; f < world_.feature_count(); ++f) {
      if (obs.mentioned[f] || !separates(f)) continue;
      double yes = 0.0;
      for (std::size_t i = 0; i < world_.diseases.size(); ++i)
        yes += probs[i] * (world_.diseases[i].features[f] ? 1.0 - world_.noise : world_.noise);
      if (std::abs(yes - 0.5) < best - 1e-12) {
        best = std::abs(yes - 0.5);
        j = f;
      }
    }
    return as_question_response("Separates the two candidates.", world_.feature_questions[j]);
  }

  std::string exploratory(const std::string& text) const {
    auto obs = observe(world_, text);
    std::vector<bool> current(world_.diseases.size(), false);
    auto names = field_line(text, "<Current Diagnosis>: ");
    std::size_t start = 0;
    while (start <= names.size()) {
      auto end = names.find(", ", start);
      if (auto i = world_.disease_index(names.substr(start, end == std::string::npos ? std::string::npos : end - start)))
        current[*i] = true;
      if (end == std::string::npos) break;
      start = end + 2;
    }
    // Prefer the unmentioned feature that most often separates diseases
    // outside the current differential from its majority value.
    std::size_t best = pick_feature(obs, [](std::size_t) { return true; });
    long best_score = -1;
    for (std::size_t j = 0; j < world_.feature_count(); ++j) {
      if (obs.mentioned[j]) continue;
      long yes = 0, no = 0;
      for (std::size_t i = 0; i < world_.diseases.size(); ++i)
        if (current[i]) (world_.diseases[i].features[j] ? yes : no)++;
      bool majority = yes >= no;
      long score = 0;
      for (std::size_t i = 0; i < world_.diseases.size(); ++i)
        if (!current[i] && world_.diseases[i].features[j] != majority) ++score;
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return as_question_response("Looks beyond the current differential.", world_.feature_questions[best]);
  }

  std::string naive(const std::string& text) const {
    auto obs = observe(world_, text);
    auto j = pick_feature(obs, [](std::size_t) { return true; });
    return as_question_response("Next unexplored finding.", world_.feature_questions[j]);
  }

  std::string patient(const std::string& text) const {
    auto question = field_line(text, "<Question>: ");
    auto task_begin = text.find("<Task>: ");
    auto task_end = text.rfind("\n<Question>: ");
    std::string_view task;
    if (task_begin != std::string::npos && task_end != std::string::npos && task_end > task_begin)
      task = std::string_view(text).substr(task_begin, task_end - task_begin);
    std::string answer(kNoInformation);
    if (auto j = world_.feature_for_question(question)) {
      auto obs = observe(world_, task);
      for (const auto& f : obs.facts) {
        if (f.feature == *j) {
          answer = f.present ? "Yes." : "No.";
          break;
        }
      }
    }
    return "Response:\n" + answer;
  }

  static std::string update(const std::string& text) {
    auto open = text.rfind("{'");
    auto close = text.rfind("'}");
    if (open == std::string::npos || close == std::string::npos || close < open) return "None";
    auto pair = text.substr(open + 2, close - open - 2);
    auto sep = pair.rfind(" A: ");
    auto answer = sep == std::string::npos ? pair : pair.substr(sep + 4);
    if (text::contains_icase(answer, "no information") || text::contains_icase(answer, "not sure")) return "None";
    return pair;
  }

  std::string evaluator(const std::string& text) const {
    auto truth = field_line(text, "Ground truth: ");
    auto guess = field_line(text, "Diagnosis to evaluate: ");
    return index_.synonyms(truth, guess) ? "true" : "false";
  }

  World world_;
  icd::IcdIndex index_;
};

// Deterministic uniform double in [0, 1) from a 64-bit engine.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

inline std::string fact_sentence(const World& w, std::size_t feature, bool present) {
  return prompts::qa_string({w.feature_questions[feature], present ? "Yes." : "No."});
}

// A full case for a patient with disease `disease`. Each reported feature is
// flipped with probability `noise`; feature j is filed under category j mod 6.
inline CaseRecord make_case(const World& w, std::size_t disease, std::mt19937_64& rng, std::string case_id) {
  CaseRecord r;
  r.case_id = std::move(case_id);
  r.ground_truth = w.diseases.at(disease).name;
  r.dataset_tag = "synthetic";
  r.patient.demographics = "Synthetic patient " + r.case_id;
  r.patient.primary_symptom = "unspecified presenting complaint";
  std::vector<std::string> social, pmh;
  for (std::size_t j = 0; j < w.feature_count(); ++j) {
    bool value = w.diseases[disease].features[j];
    if (uniform01(rng) < w.noise) value = !value;
    auto s = fact_sentence(w, j, value);
    switch (j % 6) {
      case 0: r.patient.secondary_symptoms.push_back(s); break;
      case 1: social.push_back(s); break;
      case 2: pmh.push_back(s); break;
      case 3: r.patient.physical_examination.push_back(s); break;
      case 4: r.patient.laboratory_findings.push_back(s); break;
      default: r.patient.imaging_results.push_back(s); break;
    }
  }
  r.patient.social_history = text::join(social, " ");
  r.patient.past_medical_history = text::join(pmh, " ");
  return r;
}

inline std::string case_id_for(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn-%04zu", i + 1);
  return buf;
}

// `n` cases with diseases drawn uniformly at random.
inline std::vector<CaseRecord> generate_corpus(const World& w, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CaseRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto d = uniform_index(rng, w.diseases.size());
    out.push_back(make_case(w, d, rng, case_id_for(i)));
  }
  return out;
}

// Random world with pairwise distinct feature vectors. Chapters cycle
// through `chapters`.
inline World generate_world(std::size_t diseases, std::size_t features, double noise, std::uint64_t seed,
                            const std::vector<int>& chapters = {1, 2, 3, 4, 5}) {
  if (features < 64 && diseases > (std::size_t{1} << features))
    throw InvalidWorld("not enough features to give every disease a distinct profile");
  std::mt19937_64 rng(seed);
  World w;
  w.noise = noise;
  for (std::size_t j = 0; j < features; ++j)
    w.feature_questions.push_back("Is clinical finding F" + std::to_string(j + 1) + " present?");
  std::set<std::vector<bool>> used;
  while (w.diseases.size() < diseases) {
    std::vector<bool> f(features);
    if (diseases == (std::size_t{1} << features)) {
      auto code = w.diseases.size();
      for (std::size_t j = 0; j < features; ++j) f[j] = ((code >> j) & 1u) != 0;
    } else {
      for (std::size_t j = 0; j < features; ++j) f[j] = (rng() & 1u) != 0;
    }
    if (!used.insert(f).second) continue;
    char name[48];
    std::snprintf(name, sizeof name, "Synthetic disease %02zu", w.diseases.size() + 1);
    w.diseases.push_back({name, chapters[w.diseases.size() % chapters.size()], std::move(f)});
  }
  validate(w);
  return w;
}

}  // namespace inquire::synthetic
