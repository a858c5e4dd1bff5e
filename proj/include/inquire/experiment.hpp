#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "inquire/case.hpp"
#include "inquire/dialogue.hpp"
#include "inquire/icd.hpp"
#include "inquire/metrics.hpp"
#include "inquire/transcript.hpp"

namespace inquire {

inline constexpr std::uint64_t kDefaultSeeds[] = {42, 43, 44, 45, 46};

struct ExperimentConfig {
  std::string corpus_path;
  MaskMode mask = MaskMode::none();
  std::vector<DialogueMode> systems{DialogueMode::SingleShot, DialogueMode::NaiveMultiTurn, DialogueMode::MedClarify};
  std::vector<std::uint64_t> seeds{std::begin(kDefaultSeeds), std::end(kDefaultSeeds)};
  SelectorConfig selector;
  DecodingParams decoding;
  std::string output_dir = "out";
  std::size_t workers = 1;
  bool parallel_simulations = false;
  // Pool for random_question; empty means it picks among generated candidates.
  std::vector<std::string> question_bank;

  void validate() const {
    if (systems.empty()) throw ConfigError("experiment needs at least one system");
    if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
    if (workers == 0) throw ConfigError("workers must be >= 1");
    if (std::set<DialogueMode>(systems.begin(), systems.end()).size() != systems.size())
      throw ConfigError("duplicate system");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
      throw ConfigError("duplicate seed");
    selector.validate();
  }
};

inline std::vector<CaseRecord> load_corpus(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus " + path);
  std::vector<CaseRecord> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    std::vector<std::string> w;
    CaseRecord r;
    try {
      r = parse_case(line, w);
    } catch (const Error& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (r.case_id.empty()) r.case_id = "case-" + std::to_string(lineno);
    if (!ids.insert(r.case_id).second) throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate case_id " + r.case_id);
    if (warnings)
      for (auto& s : w) warnings->push_back(r.case_id + ": " + s);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_corpus(const std::string& path, const std::vector<CaseRecord>& cases) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (const auto& c : cases) out << serialize(c) << '\n';
}

inline std::vector<Transcript> read_transcripts(const std::string& path) {
  std::vector<Transcript> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(transcript_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error&) {
      // A torn last line from an interrupted run; the case is simply redone.
    }
  }
  return out;
}

// Canonical order: system, seed, then case id.
inline void sort_transcripts(std::vector<Transcript>& ts) {
  std::stable_sort(ts.begin(), ts.end(), [](const Transcript& a, const Transcript& b) {
    return std::tuple(static_cast<int>(a.mode), a.seed, a.case_id) < std::tuple(static_cast<int>(b.mode), b.seed, b.case_id);
  });
}

inline void write_transcripts(const std::string& path, const std::vector<Transcript>& ts) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  for (const auto& t : ts) out << to_json(t).dump() << '\n';
}

struct SeedMetrics {
  DialogueMode system = DialogueMode::MedClarify;
  std::uint64_t seed = 0;
  std::size_t cases = 0;
  std::size_t failed = 0;
  double top1 = 0.0, top3 = 0.0, top5 = 0.0, mrr = 0.0;
  double mean_questions = 0.0;
  double mean_questions_correct = 0.0;
  double ece = 0.0;
  std::vector<metrics::CalibrationBin> calibration;
  std::vector<double> entropy_curve;
};

struct SystemAggregate {
  DialogueMode system = DialogueMode::MedClarify;
  metrics::Summary top1, top3, top5, mrr, ece, mean_questions, mean_questions_correct;
  std::vector<double> entropy_curve;
};

struct Comparison {
  DialogueMode a = DialogueMode::MedClarify;
  DialogueMode b = DialogueMode::SingleShot;
  std::size_t pairs = 0;
  metrics::PairedTest top1;
};

struct FailedCase {
  DialogueMode system = DialogueMode::MedClarify;
  std::uint64_t seed = 0;
  std::string case_id;
  std::string error;
};

struct MetricsReport {
  std::size_t transcripts = 0;
  std::size_t k = 5;
  int max_turns = 10;
  bool paired_inputs_consistent = true;
  std::vector<SeedMetrics> per_seed;
  std::vector<SystemAggregate> aggregates;
  std::vector<Comparison> comparisons;
  std::vector<FailedCase> failed;
};

// Pure function of the transcripts: order of the input does not matter.
inline MetricsReport build_report(std::vector<Transcript> ts) {
  sort_transcripts(ts);
  MetricsReport rep;
  rep.transcripts = ts.size();
  if (!ts.empty()) {
    rep.k = ts.front().config.k;
    rep.max_turns = 0;
    for (const auto& t : ts) rep.max_turns = std::max(rep.max_turns, t.config.max_turns);
  }

  std::map<std::pair<int, std::uint64_t>, std::vector<Transcript>> groups;
  std::map<std::pair<std::uint64_t, std::string>, std::string> digests;
  for (const auto& t : ts) {
    groups[{static_cast<int>(t.mode), t.seed}].push_back(t);
    auto [it, fresh] = digests.emplace(std::pair(t.seed, t.case_id), t.input_digest);
    if (!fresh && it->second != t.input_digest) rep.paired_inputs_consistent = false;
    if (t.failed) rep.failed.push_back({t.mode, t.seed, t.case_id, t.error});
  }

  std::map<int, std::vector<const SeedMetrics*>> by_system;
  rep.per_seed.reserve(groups.size());
  for (const auto& [key, group] : groups) {
    SeedMetrics m;
    m.system = static_cast<DialogueMode>(key.first);
    m.seed = key.second;
    m.cases = group.size();
    for (const auto& t : group) m.failed += t.failed ? 1 : 0;
    m.top1 = metrics::top_k_accuracy(group, 1);
    m.top3 = metrics::top_k_accuracy(group, 3);
    m.top5 = metrics::top_k_accuracy(group, 5);
    m.mrr = metrics::mrr(group);
    m.mean_questions = metrics::mean_question_count(group);
    m.mean_questions_correct = metrics::mean_question_count(group, true);
    auto records = metrics::calibration_records(group);
    m.ece = metrics::ece(records);
    m.calibration = metrics::calibration_table(records);
    m.entropy_curve = metrics::entropy_curve(group, rep.k, rep.max_turns);
    rep.per_seed.push_back(std::move(m));
  }
  for (const auto& m : rep.per_seed) by_system[static_cast<int>(m.system)].push_back(&m);

  for (const auto& [sys, ms] : by_system) {
    SystemAggregate a;
    a.system = static_cast<DialogueMode>(sys);
    auto col = [&](double SeedMetrics::*f) {
      std::vector<double> xs;
      for (const auto* m : ms) xs.push_back(m->*f);
      return metrics::summarize(xs);
    };
    a.top1 = col(&SeedMetrics::top1);
    a.top3 = col(&SeedMetrics::top3);
    a.top5 = col(&SeedMetrics::top5);
    a.mrr = col(&SeedMetrics::mrr);
    a.ece = col(&SeedMetrics::ece);
    a.mean_questions = col(&SeedMetrics::mean_questions);
    a.mean_questions_correct = col(&SeedMetrics::mean_questions_correct);
    a.entropy_curve.assign(static_cast<std::size_t>(rep.max_turns) + 1, 0.0);
    for (const auto* m : ms)
      for (std::size_t i = 0; i < a.entropy_curve.size() && i < m->entropy_curve.size(); ++i)
        a.entropy_curve[i] += m->entropy_curve[i] / static_cast<double>(ms.size());
    rep.aggregates.push_back(std::move(a));
  }

  // Paired top-1 comparisons over (seed, case) pairs present in both systems.
  std::map<int, std::map<std::pair<std::uint64_t, std::string>, bool>> hits;
  for (const auto& t : ts) hits[static_cast<int>(t.mode)][{t.seed, t.case_id}] = t.correct_rank == 1;
  for (const auto& [sa, ha] : hits)
    for (const auto& [sb, hb] : hits) {
      if (sa == sb) continue;
      std::vector<bool> va, vb;
      for (const auto& [key, hit] : ha)
        if (auto it = hb.find(key); it != hb.end()) {
          va.push_back(hit);
          vb.push_back(it->second);
        }
      rep.comparisons.push_back({static_cast<DialogueMode>(sa), static_cast<DialogueMode>(sb), va.size(),
                                 metrics::mcnemar_one_sided(va, vb)});
    }
  return rep;
}

inline nlohmann::json to_json(const metrics::Summary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"ci95_low", s.ci_low}, {"ci95_high", s.ci_high}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& m : r.per_seed) {
    auto bins = nlohmann::json::array();
    for (const auto& b : m.calibration)
      bins.push_back({{"lower", b.lower},
                      {"upper", b.upper},
                      {"count", b.count},
                      {"mean_confidence", b.mean_confidence},
                      {"accuracy", b.accuracy}});
    per_seed.push_back({{"system", to_string(m.system)},
                        {"seed", m.seed},
                        {"cases", m.cases},
                        {"failed", m.failed},
                        {"top1", m.top1},
                        {"top3", m.top3},
                        {"top5", m.top5},
                        {"mrr", m.mrr},
                        {"mean_questions", m.mean_questions},
                        {"mean_questions_correct", m.mean_questions_correct},
                        {"ece", m.ece},
                        {"calibration", bins},
                        {"entropy_curve", m.entropy_curve}});
  }
  nlohmann::json aggregates = nlohmann::json::array();
  for (const auto& a : r.aggregates)
    aggregates.push_back({{"system", to_string(a.system)},
                          {"top1", to_json(a.top1)},
                          {"top3", to_json(a.top3)},
                          {"top5", to_json(a.top5)},
                          {"mrr", to_json(a.mrr)},
                          {"ece", to_json(a.ece)},
                          {"mean_questions", to_json(a.mean_questions)},
                          {"mean_questions_correct", to_json(a.mean_questions_correct)},
                          {"entropy_curve", a.entropy_curve}});
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& c : r.comparisons)
    comparisons.push_back({{"a", to_string(c.a)},
                           {"b", to_string(c.b)},
                           {"pairs", c.pairs},
                           {"a_only_correct", c.top1.a_only},
                           {"b_only_correct", c.top1.b_only},
                           {"p_one_sided", c.top1.p_value}});
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& f : r.failed)
    failed.push_back({{"system", to_string(f.system)}, {"seed", f.seed}, {"case_id", f.case_id}, {"error", f.error}});
  return {{"transcripts", r.transcripts},
          {"k", r.k},
          {"max_turns", r.max_turns},
          {"paired_inputs_consistent", r.paired_inputs_consistent},
          {"per_seed", per_seed},
          {"aggregates", aggregates},
          {"comparisons", comparisons},
          {"failed", failed}};
}

inline std::string summary_csv(const MetricsReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "system,seeds,top1_mean,top1_ci_low,top1_ci_high,top3_mean,top5_mean,mrr_mean,ece_mean,mean_questions\n";
  for (const auto& a : r.aggregates) {
    std::size_t seeds = 0;
    for (const auto& m : r.per_seed) seeds += m.system == a.system ? 1 : 0;
    os << to_string(a.system) << ',' << seeds << ',' << a.top1.mean << ',' << a.top1.ci_low << ',' << a.top1.ci_high
       << ',' << a.top3.mean << ',' << a.top5.mean << ',' << a.mrr.mean << ',' << a.ece.mean << ','
       << a.mean_questions.mean << '\n';
  }
  return os.str();
}

inline std::string entropy_csv(const MetricsReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "system,turn,mean_entropy_reduction\n";
  for (const auto& a : r.aggregates)
    for (std::size_t t = 0; t < a.entropy_curve.size(); ++t)
      os << to_string(a.system) << ',' << t << ',' << a.entropy_curve[t] << '\n';
  return os.str();
}

struct ExperimentPaths {
  std::filesystem::path transcripts, report, summary, entropy;

  explicit ExperimentPaths(const std::filesystem::path& dir)
      : transcripts(dir / "transcripts.jsonl"),
        report(dir / "report.json"),
        summary(dir / "summary.csv"),
        entropy(dir / "entropy.csv") {}
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw ParseError("cannot write " + p.string());
  out << s;
}

inline MetricsReport write_report(const std::vector<Transcript>& ts, const ExperimentPaths& paths) {
  auto rep = build_report(ts);
  write_text(paths.report, to_json(rep).dump(2) + "\n");
  write_text(paths.summary, summary_csv(rep));
  write_text(paths.entropy, entropy_csv(rep));
  return rep;
}

// Runs every (system, seed, case). Completed transcripts already present in
// the output file are kept; failed ones are redone. Transcripts are appended
// as they finish and the file is rewritten in canonical order at the end.
inline MetricsReport run_experiment(const ExperimentConfig& cfg, const std::vector<CaseRecord>& corpus,
                                    const Provider& provider, const icd::IcdIndex& index,
                                    const icd::SimilarityMatrix& matrix) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  ExperimentPaths paths(cfg.output_dir);

  using Key = std::tuple<int, std::uint64_t, std::string>;
  std::map<Key, Transcript> done;
  std::set<std::string> ids;
  for (const auto& c : corpus) ids.insert(c.case_id);
  const std::set<DialogueMode> modes(cfg.systems.begin(), cfg.systems.end());
  const std::set<std::uint64_t> seeds(cfg.seeds.begin(), cfg.seeds.end());
  for (auto& t : read_transcripts(paths.transcripts.string())) {
    auto expected = cfg.selector;
    if (t.mode == DialogueMode::NaiveEntropy) expected.scoring_mode = ScoringMode::NaiveEntropy;
    if (!modes.count(t.mode) || !seeds.count(t.seed) || !ids.count(t.case_id) || t.mask != to_string(cfg.mask) ||
        !(t.config == expected))
      throw ConfigError(paths.transcripts.string() + " holds transcripts from a different experiment (case " +
                        t.case_id + "); use a fresh output directory");
    if (!t.failed) done[{static_cast<int>(t.mode), t.seed, t.case_id}] = std::move(t);
  }

  struct Job {
    DialogueMode mode;
    std::uint64_t seed;
    const CaseRecord* record;
  };
  std::vector<Job> jobs;
  for (auto mode : cfg.systems)
    for (auto seed : cfg.seeds)
      for (const auto& c : corpus)
        if (!done.count({static_cast<int>(mode), seed, c.case_id})) jobs.push_back({mode, seed, &c});

  std::mutex mu;
  std::ofstream log(paths.transcripts, std::ios::app);
  if (!log) throw ParseError("cannot write " + paths.transcripts.string());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      DialogueOptions opt{job.mode, cfg.mask, cfg.selector, cfg.decoding, job.seed, cfg.parallel_simulations,
                          cfg.question_bank};
      auto t = run_dialogue(*job.record, opt, provider, index, matrix);
      std::lock_guard lock(mu);
      log << to_json(t).dump() << '\n';
      log.flush();
      done[{static_cast<int>(t.mode), t.seed, t.case_id}] = std::move(t);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(cfg.workers, jobs.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  log.close();

  std::vector<Transcript> all;
  for (auto& [key, t] : done) all.push_back(std::move(t));
  sort_transcripts(all);
  write_transcripts(paths.transcripts.string(), all);
  return write_report(all, paths);
}

inline MetricsReport recompute_report(const std::string& transcripts_path) {
  return build_report(read_transcripts(transcripts_path));
}

}  // namespace inquire
