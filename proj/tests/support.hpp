#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include "inquire/inquire.hpp"

namespace testing_support {

inline std::string source_path(const std::string& rel) { return std::string(INQUIRE_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline inquire::CaseRecord fixture_case() { return inquire::parse_case(slurp(source_path("data/cases/chest_pain.json"))); }

inline inquire::synthetic::World world(const std::string& name) {
  return inquire::synthetic::load_world(source_path("data/worlds/" + name + ".json"));
}

inline inquire::Candidate cand(std::string name, double conf, int chapter = 0) {
  inquire::Candidate c;
  c.name = std::move(name);
  c.confidence = conf;
  if (chapter > 0) c.chapter = inquire::ChapterId::of(chapter);
  return c;
}

inline inquire::Belief belief(std::vector<std::pair<std::string, double>> xs) {
  inquire::Belief b;
  for (auto& [n, p] : xs) b.candidates.push_back(cand(n, p));
  return b;
}

// Answers each role through a caller-supplied function; counts calls.
class ScriptedProvider : public inquire::Provider {
 public:
  using Fn = std::function<std::string(const inquire::PromptRequest&)>;
  std::map<inquire::prompts::PromptRole, Fn> handlers;
  mutable std::map<inquire::prompts::PromptRole, int> calls;

  std::string complete(const inquire::PromptRequest& r, const inquire::DecodingParams&, std::uint64_t) const override {
    ++calls[r.role];
    auto it = handlers.find(r.role);
    if (it == handlers.end()) throw inquire::ProviderFailure("no handler", false);
    return it->second(r);
  }
  inquire::ProviderIdentity identity() const override { return {"scripted", "test"}; }
};

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("inquire_" + tag + "_" + std::to_string(std::hash<std::string>{}(tag + std::to_string(::getpid()))));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace testing_support
