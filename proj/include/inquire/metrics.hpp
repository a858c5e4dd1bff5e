#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "inquire/belief.hpp"
#include "inquire/transcript.hpp"

namespace inquire::metrics {

inline bool correct_within(const Transcript& t, int k) { return t.correct_rank >= 1 && t.correct_rank <= k; }

inline double top_k_accuracy(std::span<const Transcript> ts, int k) {
  if (ts.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : ts) hits += correct_within(t, k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ts.size());
}

// Reciprocal rank truncated at the final differential: absent counts 0.
inline double mrr(std::span<const Transcript> ts) {
  if (ts.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : ts)
    if (t.correct_rank > 0) total += 1.0 / static_cast<double>(t.correct_rank);
  return total / static_cast<double>(ts.size());
}

struct CalibrationRecord {
  double confidence = 0.0;
  bool correct = false;
};

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
};

// Top-1 normalized probability of the final belief against rank-1 correctness.
inline std::vector<CalibrationRecord> calibration_records(std::span<const Transcript> ts) {
  std::vector<CalibrationRecord> out;
  for (const auto& t : ts) {
    if (t.final_belief.empty()) {
      out.push_back({0.0, false});
      continue;
    }
    out.push_back({top_gap(normalize(t.final_belief)).p_max, t.correct_rank == 1});
  }
  return out;
}

// Equal-width bins on [0, 1]; a confidence of exactly 1 lands in the last bin.
inline std::vector<CalibrationBin> calibration_table(std::span<const CalibrationRecord> records, std::size_t bins = 10) {
  std::vector<CalibrationBin> table(bins);
  std::vector<double> conf_sum(bins, 0.0), hit_sum(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    table[b].lower = static_cast<double>(b) / static_cast<double>(bins);
    table[b].upper = static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (const auto& r : records) {
    auto b = static_cast<std::size_t>(std::clamp(r.confidence, 0.0, 1.0) * static_cast<double>(bins));
    b = std::min(b, bins - 1);
    table[b].count++;
    conf_sum[b] += r.confidence;
    hit_sum[b] += r.correct ? 1.0 : 0.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (table[b].count == 0) continue;
    table[b].mean_confidence = conf_sum[b] / static_cast<double>(table[b].count);
    table[b].accuracy = hit_sum[b] / static_cast<double>(table[b].count);
  }
  return table;
}

inline double ece(std::span<const CalibrationRecord> records, std::size_t bins = 10) {
  if (records.empty()) return 0.0;
  double total = 0.0;
  const double n = static_cast<double>(records.size());
  for (const auto& b : calibration_table(records, bins))
    if (b.count > 0) total += (static_cast<double>(b.count) / n) * std::abs(b.accuracy - b.mean_confidence);
  return total;
}

// Mean entropy reduction against a uniform start over k candidates. Entry 0
// is that start itself; entry t uses the belief after the t-th answer, with
// shorter dialogues carrying their last belief forward.
inline std::vector<double> entropy_curve(std::span<const Transcript> ts, std::size_t k, int max_turns) {
  const double baseline = std::log2(static_cast<double>(k));
  std::vector<double> curve(static_cast<std::size_t>(max_turns) + 1, 0.0);
  if (ts.empty()) return curve;
  for (const auto& t : ts) {
    double h = t.initial_belief.empty() ? baseline : entropy_bits(t.initial_belief);
    for (int turn = 1; turn <= max_turns; ++turn) {
      if (static_cast<std::size_t>(turn) <= t.turns.size()) h = t.turns[static_cast<std::size_t>(turn) - 1].entropy_after;
      curve[static_cast<std::size_t>(turn)] += baseline - h;
    }
  }
  for (std::size_t i = 1; i < curve.size(); ++i) curve[i] /= static_cast<double>(ts.size());
  return curve;
}

inline double mean_question_count(std::span<const Transcript> ts, bool correct_only = false) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& t : ts) {
    if (correct_only && t.correct_rank != 1) continue;
    total += static_cast<double>(t.question_count());
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Mean, sample standard deviation and a Student-t interval. With a single
// value the interval collapses to the mean.
inline Summary summarize(std::span<const double> xs, double level = 0.95) {
  Summary s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() < 2) {
    s.ci_low = s.ci_high = s.mean;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / (n - 1.0));
  boost::math::students_t dist(n - 1.0);
  const double half = boost::math::quantile(dist, 0.5 + level / 2.0) * s.sd / std::sqrt(n);
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

struct PairedTest {
  std::size_t a_only = 0;
  std::size_t b_only = 0;
  double p_value = 1.0;
};

// Exact one-sided McNemar test that A is right more often than B on paired
// outcomes.
inline PairedTest mcnemar_one_sided(const std::vector<bool>& a, const std::vector<bool>& b) {
  PairedTest r;
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] && !b[i]) ++r.a_only;
    if (!a[i] && b[i]) ++r.b_only;
  }
  const auto discordant = r.a_only + r.b_only;
  if (discordant == 0 || r.a_only == 0) return r;
  boost::math::binomial dist(static_cast<double>(discordant), 0.5);
  r.p_value = boost::math::cdf(boost::math::complement(dist, static_cast<double>(r.a_only) - 1.0));
  return r;
}

}  // namespace inquire::metrics
