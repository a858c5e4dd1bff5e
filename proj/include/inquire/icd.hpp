#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "inquire/belief.hpp"
#include "inquire/chapter.hpp"
#include "inquire/error.hpp"
#include "inquire/text.hpp"

namespace inquire::icd {

// Similarity assigned to any pair involving an unknown or unlisted chapter.
inline constexpr double kUnknownSimilarity = 0.5;
inline constexpr double kSymmetryTolerance = 1e-9;

// Pre-recorded chapter-to-chapter similarities. Immutable after construction;
// construction validates symmetry, the unit diagonal and the [0, 1] range.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::vector<int> labels, std::vector<std::vector<double>> values)
      : labels_(std::move(labels)), values_(std::move(values)) {
    const auto n = labels_.size();
    if (n == 0) throw InvalidMatrix("similarity matrix has no labels");
    if (values_.size() != n) throw InvalidMatrix("similarity matrix row count does not match labels");
    for (std::size_t i = 0; i < n; ++i) {
      if (values_[i].size() != n) throw InvalidMatrix("similarity matrix is not square");
      if (!index_.emplace(labels_[i], i).second)
        throw InvalidMatrix("duplicate chapter label " + std::to_string(labels_[i]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (values_[i][i] != 1.0) throw InvalidMatrix("diagonal entry is not exactly 1.0");
      for (std::size_t j = 0; j < n; ++j) {
        double v = values_[i][j];
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidMatrix("similarity entry outside [0, 1]");
        if (std::abs(v - values_[j][i]) > kSymmetryTolerance) throw InvalidMatrix("similarity matrix is not symmetric");
      }
    }
  }

  // Chapters 1..chapters with `off_diagonal` everywhere, overlaid with the
  // published five-chapter block.
  static SimilarityMatrix with_default_chapters(int chapters = 26, double off_diagonal = 0.3) {
    std::vector<int> labels;
    std::vector<std::vector<double>> values(static_cast<std::size_t>(chapters),
                                            std::vector<double>(static_cast<std::size_t>(chapters), off_diagonal));
    for (int i = 0; i < chapters; ++i) {
      labels.push_back(i + 1);
      values[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    }
    const auto block = chapters_one_to_five();
    for (std::size_t i = 0; i < 5 && i < values.size(); ++i)
      for (std::size_t j = 0; j < 5 && j < values.size(); ++j) values[i][j] = block[i][j];
    return SimilarityMatrix(std::move(labels), std::move(values));
  }

  static SimilarityMatrix table_excerpt() {
    auto block = chapters_one_to_five();
    std::vector<std::vector<double>> values;
    for (const auto& row : block) values.emplace_back(row.begin(), row.end());
    return SimilarityMatrix({1, 2, 3, 4, 5}, std::move(values));
  }

  double sim(const ChapterId& a, const ChapterId& b) const {
    if (!a.known() || !b.known()) return kUnknownSimilarity;
    auto ia = index_.find(*a.id);
    auto ib = index_.find(*b.id);
    if (ia == index_.end() || ib == index_.end()) return kUnknownSimilarity;
    return values_[ia->second][ib->second];
  }

  bool contains(int chapter) const { return index_.count(chapter) != 0; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::vector<double>>& values() const { return values_; }

 private:
  static std::array<std::array<double, 5>, 5> chapters_one_to_five() {
    return {{
        {1.00, 0.35, 0.35, 0.65, 0.20},
        {0.35, 1.00, 0.50, 0.40, 0.25},
        {0.35, 0.50, 1.00, 0.60, 0.30},
        {0.65, 0.40, 0.60, 1.00, 0.40},
        {0.20, 0.25, 0.30, 0.40, 1.00},
    }};
  }

  std::vector<int> labels_;
  std::vector<std::vector<double>> values_;
  std::unordered_map<int, std::size_t> index_;
};

inline SimilarityMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    return SimilarityMatrix(j.at("labels").get<std::vector<int>>(),
                            j.at("values").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidMatrix(std::string("malformed similarity matrix file: ") + e.what());
  }
}

inline nlohmann::json to_json(const SimilarityMatrix& m) {
  return nlohmann::json{{"labels", m.labels()}, {"values", m.values()}};
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline SimilarityMatrix load_matrix(const std::string& path) { return matrix_from_json(read_json_file(path)); }

struct Resolution {
  std::optional<std::string> code;
  ChapterId chapter;

  bool operator==(const Resolution&) const = default;
};

// Offline terminology lookup keyed by canonical disease name. Names sharing a
// code are synonyms.
class IcdIndex {
 public:
  IcdIndex() = default;

  void add(std::string_view name, std::string code, int chapter) {
    entries_[text::canonical_name(name)] = Resolution{std::move(code), ChapterId::of(chapter)};
  }

  // Total: unseen names map to (no code, unknown chapter).
  Resolution resolve(std::string_view name) const {
    auto it = entries_.find(text::canonical_name(name));
    if (it == entries_.end()) return {std::nullopt, ChapterId::unknown()};
    return it->second;
  }

  bool synonyms(std::string_view a, std::string_view b) const {
    if (text::canonical_name(a) == text::canonical_name(b)) return true;
    auto ra = resolve(a);
    auto rb = resolve(b);
    return ra.code && rb.code && *ra.code == *rb.code;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Resolution> entries_;
};

inline IcdIndex index_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("ICD index must be a JSON object");
  IcdIndex idx;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    if (!v.is_object() || !v.contains("code") || !v.contains("chapter"))
      throw ParseError("ICD index entry '" + it.key() + "' needs code and chapter");
    idx.add(it.key(), v.at("code").get<std::string>(), v.at("chapter").get<int>());
  }
  return idx;
}

inline IcdIndex load_index(const std::string& path) { return index_from_json(read_json_file(path)); }

// Fills icd_code and chapter of every candidate from the index. Candidates
// that already carry a code keep it.
inline Belief resolve_belief(Belief b, const IcdIndex& index) {
  for (auto& c : b.candidates) {
    auto r = index.resolve(c.name);
    if (!c.icd_code) c.icd_code = r.code;
    if (!c.chapter.known()) c.chapter = r.chapter;
  }
  return b;
}

inline std::vector<ChapterId> chapters_of(const Belief& b) {
  std::vector<ChapterId> out;
  out.reserve(b.size());
  for (const auto& c : b.candidates) out.push_back(c.chapter);
  return out;
}

inline std::vector<double> confidences_of(const Belief& b) {
  std::vector<double> out;
  out.reserve(b.size());
  for (const auto& c : b.candidates) out.push_back(c.confidence);
  return out;
}

// Mean pairwise chapter similarity over the full cross product.
inline double set_similarity(std::span<const ChapterId> plus, std::span<const ChapterId> minus,
                             const SimilarityMatrix& m) {
  if (plus.empty() || minus.empty()) throw EmptyDiagnosisSet("set_similarity needs two non-empty diagnosis sets");
  double total = 0.0;
  for (const auto& a : plus)
    for (const auto& b : minus) total += m.sim(a, b);
  return total / (static_cast<double>(plus.size()) * static_cast<double>(minus.size()));
}

inline double div(std::span<const ChapterId> plus, std::span<const ChapterId> minus, const SimilarityMatrix& m) {
  return 1.0 - set_similarity(plus, minus, m);
}

// Gini coefficient over values sorted ascending. 0 for uniform input,
// (n-1)/n for a single nonzero value.
inline double gini(std::span<const double> values) {
  if (values.empty()) throw DegenerateInput("gini of an empty list");
  std::vector<double> x(values.begin(), values.end());
  for (double v : x)
    if (!(v >= 0.0)) throw DegenerateInput("gini needs nonnegative values");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double total = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    total += x[k];
    weighted += (2.0 * static_cast<double>(k + 1) - (n + 1.0)) * x[k];
  }
  if (!(total > 0.0)) throw DegenerateInput("gini of all-zero values");
  return weighted / (n * total);
}

inline double con(std::span<const double> plus, std::span<const double> minus) {
  return 0.5 * ((1.0 - gini(plus)) + (1.0 - gini(minus)));
}

}  // namespace inquire::icd
