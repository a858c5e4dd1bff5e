// inquire: batch experiments, terminal dialogues, the HTTP session service,
// report recomputation and synthetic-world generators.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "inquire/http_server.hpp"
#include "inquire/inquire.hpp"
#include "inquire/remote_provider.hpp"

namespace {

using namespace inquire;

struct ProviderOptions {
  std::string world;
  std::string api_base;
  std::string model;
  std::string index;
  std::string matrix;
  std::string config;
  double temperature = DecodingParams{}.temperature;
  double min_p = DecodingParams{}.min_p;
  double top_p = DecodingParams{}.top_p;
  double repetition_penalty = DecodingParams{}.repetition_penalty;
};

void add_provider_options(CLI::App* cmd, ProviderOptions& o) {
  cmd->add_option("--world", o.world, "Synthetic world JSON; selects the offline synthetic provider");
  cmd->add_option("--api-base", o.api_base, "Chat completions base URL (default $INQUIRE_API_BASE)");
  cmd->add_option("--model", o.model, "Remote model name (default $INQUIRE_MODEL)");
  cmd->add_option("--index", o.index, "ICD index JSON {name: {code, chapter}}");
  cmd->add_option("--matrix", o.matrix, "Chapter similarity matrix JSON {labels, values}");
  cmd->add_option("--config", o.config, "Selector config JSON (overrides defaults)");
  cmd->add_option("--temperature", o.temperature, "Decoding temperature");
  cmd->add_option("--min-p", o.min_p, "Decoding min-p");
  cmd->add_option("--top-p", o.top_p, "Decoding top-p");
  cmd->add_option("--repetition-penalty", o.repetition_penalty, "Decoding repetition penalty");
}

struct Backend {
  std::unique_ptr<Provider> provider;
  icd::IcdIndex index;
  std::unique_ptr<icd::SimilarityMatrix> matrix;
  SelectorConfig selector;
  DecodingParams decoding;
};

Backend make_backend(const ProviderOptions& o) {
  Backend b;
  if (!o.world.empty()) {
    auto world = synthetic::load_world(o.world);
    b.index = o.index.empty() ? synthetic::world_index(world) : icd::load_index(o.index);
    b.provider = std::make_unique<synthetic::SyntheticProvider>(std::move(world), b.index);
  } else {
    auto rc = RemoteConfig::from_env();
    if (!o.api_base.empty()) rc.base_url = o.api_base;
    if (!o.model.empty()) rc.model = o.model;
    b.provider = std::make_unique<RemoteProvider>(rc);
    if (!o.index.empty()) b.index = icd::load_index(o.index);
  }
  b.matrix = std::make_unique<icd::SimilarityMatrix>(o.matrix.empty() ? icd::SimilarityMatrix::with_default_chapters()
                                                                       : icd::load_matrix(o.matrix));
  if (!o.config.empty()) b.selector = config_from_json(icd::read_json_file(o.config));
  b.decoding = {o.temperature, o.min_p, o.top_p, o.repetition_penalty};
  return b;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!text::trim(item).empty()) out.push_back(text::trim(item));
  return out;
}

void print_belief(const Belief& b) {
  if (b.empty()) return;
  auto d = normalize(b);
  for (std::size_t i = 0; i < b.size(); ++i)
    std::cout << "  " << i + 1 << ". " << b.candidates[i].name << "  p=" << prompts::format_confidence(d.probs[i])
              << "  chapter=" << to_string(b.candidates[i].chapter) << '\n';
  std::cout << "  entropy=" << entropy_bits(b) << " bits\n";
}

void print_report(const MetricsReport& rep) {
  std::cout << summary_csv(rep);
  if (!rep.failed.empty()) {
    std::cerr << rep.failed.size() << " failed dialogue(s):\n";
    for (const auto& f : rep.failed)
      std::cerr << "  " << to_string(f.system) << " seed " << f.seed << " " << f.case_id << ": " << f.error << '\n';
  }
  if (!rep.paired_inputs_consistent) std::cerr << "warning: systems saw different inputs for the same case and seed\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-asking diagnostic inquiry: experiments, sessions and reports"};
  app.require_subcommand(1);

  // run
  ProviderOptions run_p;
  std::string run_corpus, run_systems = "single_shot,naive_multi_turn,medclarify", run_seeds = "42,43,44,45,46",
                          run_mask = "none", run_out = "out";
  std::string run_bank;
  std::size_t run_workers = 1;
  bool run_parallel = false;
  auto* run = app.add_subcommand("run", "Run a batch experiment over a corpus");
  add_provider_options(run, run_p);
  run->add_option("--corpus", run_corpus, "Corpus JSONL of case records")->required();
  run->add_option("--systems", run_systems, "Comma list of single_shot|naive_multi_turn|naive_entropy|medclarify|random_question");
  run->add_option("--seeds", run_seeds, "Comma list of seeds");
  run->add_option("--mask", run_mask, "none|all|symptoms|social|pmh|exam|lab|imaging");
  run->add_option("--out", run_out, "Output directory (transcripts.jsonl, report.json, summary.csv, entropy.csv)");
  run->add_option("--workers", run_workers, "Concurrent dialogues");
  run->add_flag("--parallel-simulations", run_parallel, "Run answer simulations concurrently");
  run->add_option("--question-bank", run_bank,
                  "Question pool for random_question: a text file with one question per line, or 'world' for the "
                  "synthetic world's feature questions");

  // interact
  ProviderOptions int_p;
  std::string int_case, int_mode = "medclarify", int_mask = "none";
  std::uint64_t int_seed = 42;
  bool int_auto = false;
  auto* interact = app.add_subcommand("interact", "Terminal dialogue; you answer as the patient");
  add_provider_options(interact, int_p);
  interact->add_option("--case", int_case, "Case record JSON file")->required();
  interact->add_option("--mode", int_mode, "Dialogue mode");
  interact->add_option("--mask", int_mask, "Mask applied to the doctor's view");
  interact->add_option("--seed", int_seed, "Seed");
  interact->add_flag("--auto", int_auto, "Let the Patient agent answer from the full case");

  // serve
  ProviderOptions srv_p;
  std::string srv_host = "127.0.0.1", srv_corpus, srv_transcripts = "sessions.jsonl";
  int srv_port = 0;
  long srv_idle = 1800;
  auto* serve = app.add_subcommand("serve", "HTTP session API");
  add_provider_options(serve, srv_p);
  serve->add_option("--host", srv_host, "Bind address");
  serve->add_option("--port", srv_port, "Port (default $INQUIRE_PORT or 8080)");
  serve->add_option("--corpus", srv_corpus, "Corpus JSONL whose cases can be opened by case_id");
  serve->add_option("--transcripts", srv_transcripts, "JSONL file receiving completed session transcripts");
  serve->add_option("--idle-timeout", srv_idle, "Seconds before an idle session is dropped");

  // report
  std::string rep_in, rep_out;
  auto* report = app.add_subcommand("report", "Recompute the metrics report from stored transcripts");
  report->add_option("--transcripts", rep_in, "Transcripts JSONL")->required();
  report->add_option("--out", rep_out, "Directory for report.json, summary.csv and entropy.csv");

  // world
  std::size_t w_diseases = 8, w_features = 3;
  double w_noise = 0.0;
  std::uint64_t w_seed = 1;
  std::string w_out;
  auto* world = app.add_subcommand("world", "Generate a synthetic world");
  world->add_option("--diseases", w_diseases, "Disease count");
  world->add_option("--features", w_features, "Binary feature count");
  world->add_option("--noise", w_noise, "Answer flip probability in [0, 0.5)");
  world->add_option("--seed", w_seed, "Seed");
  world->add_option("--out", w_out, "Output JSON (default stdout)");

  // synth
  std::string s_world, s_out;
  std::size_t s_n = 200;
  std::uint64_t s_seed = 42;
  auto* synth = app.add_subcommand("synth", "Sample a case corpus from a synthetic world");
  synth->add_option("--world", s_world, "World JSON")->required();
  synth->add_option("--n", s_n, "Case count");
  synth->add_option("--seed", s_seed, "Seed");
  synth->add_option("--out", s_out, "Output JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto be = make_backend(run_p);
      ExperimentConfig cfg;
      cfg.corpus_path = run_corpus;
      cfg.mask = parse_mask_mode(run_mask);
      cfg.systems.clear();
      for (const auto& s : split_csv(run_systems)) cfg.systems.push_back(parse_dialogue_mode(s));
      cfg.seeds.clear();
      for (const auto& s : split_csv(run_seeds)) cfg.seeds.push_back(std::stoull(s));
      cfg.selector = be.selector;
      cfg.decoding = be.decoding;
      cfg.output_dir = run_out;
      cfg.workers = run_workers;
      cfg.parallel_simulations = run_parallel;
      if (run_bank == "world") {
        if (run_p.world.empty()) throw ConfigError("--question-bank world needs --world");
        cfg.question_bank = synthetic::load_world(run_p.world).feature_questions;
      } else if (!run_bank.empty()) {
        std::ifstream in(run_bank);
        if (!in) throw ParseError("cannot open " + run_bank);
        for (std::string line; std::getline(in, line);)
          if (!text::trim(line).empty()) cfg.question_bank.push_back(text::trim(line));
      }
      std::vector<std::string> warnings;
      auto corpus = load_corpus(run_corpus, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      print_report(run_experiment(cfg, corpus, *be.provider, be.index, *be.matrix));
      std::cerr << "wrote " << ExperimentPaths(run_out).report.string() << '\n';
    } else if (*interact) {
      auto be = make_backend(int_p);
      std::vector<std::string> warnings;
      std::ifstream in(int_case);
      if (!in) throw ParseError("cannot open " + int_case);
      std::stringstream buf;
      buf << in.rdbuf();
      auto record = parse_case(buf.str(), warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      auto mask = parse_mask_mode(int_mask);
      InquiryContext ctx{*be.provider, be.index, *be.matrix, be.selector, be.decoding, int_seed, true, {}};
      Inquiry inq(apply_mask(record.patient, mask), parse_dialogue_mode(int_mode), ctx,
                  case_rng_seed(int_seed, record.case_id));
      inq.start();
      std::cout << "Initial differential:\n";
      print_belief(inq.belief());
      while (inq.status() == InquiryStatus::AwaitingAnswer) {
        const auto& p = *inq.pending();
        for (const auto& r : p.scores)
          std::cout << (r.question.index == p.question.index ? "  * " : "    ") << "[" << to_string(r.question.kind)
                    << "] ig=" << r.score.ig << " div=" << r.score.div << " con=" << r.score.con
                    << " total=" << r.score.total << "  " << r.question.text << '\n';
        std::cout << "\nQ" << inq.turns().size() + 1 << ": " << p.question.text << "\n> " << std::flush;
        std::string reply;
        if (int_auto) {
          reply = patient_answer(record.patient, p.question.text, *be.provider, be.decoding, int_seed);
          std::cout << reply << '\n';
        } else if (!std::getline(std::cin, reply) || text::trim(reply) == "/quit") {
          inq.finalize();
          break;
        }
        if (text::trim(reply).empty()) continue;
        const auto& turn = inq.answer(reply);
        std::cout << "evidence: " << (turn.evidence ? *turn.evidence : "None") << '\n';
        print_belief(inq.belief());
      }
      std::cout << "\nTerminated: " << to_string(inq.termination()) << "\nFinal differential:\n";
      auto final_belief = inq.belief();
      trim_to(final_belief, 5);
      print_belief(final_belief);
    } else if (*serve) {
      auto be = make_backend(srv_p);
      if (srv_port == 0) {
        const char* env = std::getenv("INQUIRE_PORT");
        srv_port = env ? std::atoi(env) : 8080;
      }
      ServiceConfig sc;
      sc.selector = be.selector;
      sc.decoding = be.decoding;
      sc.idle_timeout = std::chrono::seconds(srv_idle);
      sc.transcript_path = srv_transcripts;
      std::vector<CaseRecord> corpus;
      if (!srv_corpus.empty()) corpus = load_corpus(srv_corpus);
      SessionService service(*be.provider, be.index, *be.matrix, sc, std::move(corpus));
      httplib::Server server;
      mount(server, service);
      std::cerr << "listening on http://" << srv_host << ':' << srv_port << '\n';
      if (!server.listen(srv_host, srv_port)) throw ConfigError("cannot bind " + srv_host + ":" + std::to_string(srv_port));
    } else if (*report) {
      auto ts = read_transcripts(rep_in);
      if (ts.empty()) throw ParseError("no transcripts in " + rep_in);
      if (!rep_out.empty()) {
        std::filesystem::create_directories(rep_out);
        print_report(write_report(ts, ExperimentPaths(rep_out)));
      } else {
        std::cout << to_json(build_report(ts)).dump(2) << '\n';
      }
    } else if (*world) {
      auto w = synthetic::generate_world(w_diseases, w_features, w_noise, w_seed);
      auto text = synthetic::to_json(w).dump(2) + "\n";
      if (w_out.empty())
        std::cout << text;
      else
        write_text(w_out, text);
    } else if (*synth) {
      write_corpus(s_out, synthetic::generate_corpus(synthetic::load_world(s_world), s_n, s_seed));
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
