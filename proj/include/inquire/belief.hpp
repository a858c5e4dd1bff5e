#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "inquire/chapter.hpp"
#include "inquire/error.hpp"
#include "inquire/text.hpp"

namespace inquire {

inline constexpr double kConfidenceFloor = 0.1;

struct Candidate {
  std::string name;
  std::optional<std::string> icd_code;
  ChapterId chapter;
  double confidence = 0.0;

  bool operator==(const Candidate&) const = default;
};

// Identity used to match candidates across turns: ICD code when known,
// otherwise the canonical (case-folded, whitespace-collapsed) name.
inline std::string identity_key(const Candidate& c) {
  if (c.icd_code && !c.icd_code->empty()) return "icd:" + *c.icd_code;
  return "name:" + text::canonical_name(c.name);
}

// Ordered differential: descending confidence, ties by canonical name.
struct Belief {
  std::vector<Candidate> candidates;
  int turn = 0;

  bool empty() const { return candidates.empty(); }
  std::size_t size() const { return candidates.size(); }
  bool operator==(const Belief&) const = default;
};

inline void sort_candidates(std::vector<Candidate>& cs) {
  std::stable_sort(cs.begin(), cs.end(), [](const Candidate& a, const Candidate& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return text::canonical_name(a.name) < text::canonical_name(b.name);
  });
}

inline void trim_to(Belief& b, std::size_t k) {
  if (b.candidates.size() > k) b.candidates.resize(k);
}

// Ingest raw provider confidences: clamp into [0.1, 1], merge duplicates
// (keeping the higher score), sort and truncate to k.
inline Belief make_belief(std::vector<Candidate> raw, std::size_t k, int turn = 0) {
  std::vector<Candidate> merged;
  std::unordered_map<std::string, std::size_t> seen;
  for (auto& c : raw) {
    c.name = text::trim(c.name);
    if (c.name.empty() || !std::isfinite(c.confidence)) continue;
    c.confidence = std::clamp(c.confidence, kConfidenceFloor, 1.0);
    auto key = identity_key(c);
    if (auto it = seen.find(key); it != seen.end()) {
      auto& prev = merged[it->second];
      if (c.confidence > prev.confidence) prev.confidence = c.confidence;
      continue;
    }
    seen.emplace(key, merged.size());
    merged.push_back(std::move(c));
  }
  sort_candidates(merged);
  Belief b{std::move(merged), turn};
  trim_to(b, k);
  return b;
}

// Normalized view of a belief's confidences, aligned with its candidates.
struct Distribution {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
};

inline Distribution normalize(const Belief& belief) {
  if (belief.empty()) throw EmptyBelief("cannot normalize an empty belief");
  double total = 0.0;
  for (const auto& c : belief.candidates) total += c.confidence;
  if (!(total > 0.0)) throw EmptyBelief("belief confidences sum to zero");
  Distribution d;
  d.probs.reserve(belief.size());
  for (const auto& c : belief.candidates) d.probs.push_back(c.confidence / total);
  return d;
}

inline Distribution normalize(const std::vector<double>& weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || !(total > 0.0)) throw EmptyBelief("weights sum to zero");
  Distribution d{weights};
  for (auto& p : d.probs) p /= total;
  return d;
}

// Shannon entropy in bits, with 0 log 0 = 0.
inline double entropy_bits(const Distribution& dist) {
  double h = 0.0;
  for (double p : dist.probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

inline double entropy_bits(const Belief& belief) { return entropy_bits(normalize(belief)); }

// Posterior proportional to likelihood x prior. Candidates are matched by
// identity_key; candidates new in the likelihood enter with the mean prior
// mass of the existing candidates, candidates missing from the likelihood are
// dropped. Names, codes and chapters are taken from the likelihood side.
inline Belief bayes_update(const Belief& prior, const Belief& likelihood) {
  if (likelihood.empty()) throw EmptyBelief("likelihood differential is empty");
  std::unordered_map<std::string, double> prior_mass;
  double mean_prior = 0.0;
  if (!prior.empty()) {
    auto p = normalize(prior);
    for (std::size_t i = 0; i < prior.size(); ++i) {
      prior_mass[identity_key(prior.candidates[i])] += p.probs[i];
      mean_prior += p.probs[i];
    }
    mean_prior /= static_cast<double>(prior.size());
  } else {
    mean_prior = 1.0;
  }

  auto l = normalize(likelihood);
  std::vector<Candidate> post;
  post.reserve(likelihood.size());
  double total = 0.0;
  for (std::size_t i = 0; i < likelihood.size(); ++i) {
    auto c = likelihood.candidates[i];
    auto it = prior_mass.find(identity_key(c));
    double pr = it != prior_mass.end() ? it->second : mean_prior;
    c.confidence = l.probs[i] * pr;
    total += c.confidence;
    post.push_back(std::move(c));
  }
  if (!(total > 0.0)) throw EmptyBelief("posterior has no mass");
  for (auto& c : post) c.confidence /= total;
  sort_candidates(post);
  return Belief{std::move(post), prior.turn + 1};
}

inline constexpr double kProbabilityFloor = 1e-12;

// Softmax of ln(p) / T. T = 1 is the identity; T > 1 flattens.
inline Distribution temperature_scale(const Distribution& posterior, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw InvalidTemperature("temperature must be > 0, got " + std::to_string(temperature));
  if (posterior.probs.empty()) throw EmptyBelief("cannot scale an empty distribution");
  std::vector<double> z;
  z.reserve(posterior.size());
  for (double p : posterior.probs) z.push_back(std::log(std::max(p, kProbabilityFloor)) / temperature);
  double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (auto& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (auto& v : z) v /= total;
  return Distribution{std::move(z)};
}

// Replaces a belief's confidences by a distribution aligned with it.
inline Belief with_probabilities(Belief b, const Distribution& d) {
  for (std::size_t i = 0; i < b.size() && i < d.size(); ++i) b.candidates[i].confidence = d.probs[i];
  sort_candidates(b.candidates);
  return b;
}

struct TopGap {
  double p_max = 0.0;
  double delta = 0.0;
};

inline TopGap top_gap(const Distribution& dist) {
  if (dist.probs.empty()) return {};
  double first = -1.0, second = -1.0;
  for (double p : dist.probs) {
    if (p > first) {
      second = first;
      first = p;
    } else if (p > second) {
      second = p;
    }
  }
  if (second < 0.0) return {first, first};
  return {first, first - second};
}

inline nlohmann::json to_json(const Candidate& c) {
  return nlohmann::json{
      {"name", c.name},
      {"icd_code", c.icd_code ? nlohmann::json(*c.icd_code) : nlohmann::json(nullptr)},
      {"chapter", to_json(c.chapter)},
      {"confidence", c.confidence},
  };
}

inline nlohmann::json to_json(const Belief& b) {
  auto arr = nlohmann::json::array();
  for (const auto& c : b.candidates) arr.push_back(to_json(c));
  return arr;
}

inline Belief belief_from_json(const nlohmann::json& j, int turn = 0) {
  Belief b;
  b.turn = turn;
  if (!j.is_array()) throw ParseError("belief must be a JSON array");
  for (const auto& e : j) {
    Candidate c;
    c.name = e.at("name").get<std::string>();
    if (auto it = e.find("icd_code"); it != e.end() && it->is_string()) c.icd_code = it->get<std::string>();
    if (auto it = e.find("chapter"); it != e.end()) c.chapter = chapter_from_json(*it);
    c.confidence = e.at("confidence").get<double>();
    b.candidates.push_back(std::move(c));
  }
  return b;
}

}  // namespace inquire
