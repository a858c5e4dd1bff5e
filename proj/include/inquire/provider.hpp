#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "inquire/belief.hpp"
#include "inquire/error.hpp"
#include "inquire/prompts.hpp"
#include "inquire/text.hpp"

namespace inquire {

struct DecodingParams {
  double temperature = 0.3;
  double min_p = 0.1;
  double top_p = 0.9;
  double repetition_penalty = 0.9;
};

struct ProviderIdentity {
  std::string provider;
  std::string model;
};

struct PromptRequest {
  prompts::PromptRole role;
  std::string text;
};

// Chat-style model endpoint. `complete` must be safe to call concurrently.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const PromptRequest& request, const DecodingParams& params,
                               std::uint64_t seed) const = 0;
  virtual ProviderIdentity identity() const = 0;
};

inline constexpr int kProviderAttempts = 3;

inline std::string complete_with_retry(const Provider& provider, const PromptRequest& request,
                                       const DecodingParams& params, std::uint64_t seed,
                                       int attempts = kProviderAttempts) {
  for (int attempt = 1;; ++attempt) {
    try {
      return provider.complete(request, params, seed);
    } catch (const ProviderFailure& e) {
      if (!e.retryable() || attempt >= attempts) throw;
    }
  }
}

// Extracts the text after the last "Response:" marker, first non-empty line,
// surrounding quotes and brackets stripped.
inline std::string parse_response_field(const std::string& raw) {
  std::string body = raw;
  if (auto pos = raw.rfind("Response:"); pos != std::string::npos) body = raw.substr(pos + 9);
  std::string line;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find('\n', start);
    line = text::trim(body.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (!line.empty() || end == std::string::npos) break;
    start = end + 1;
  }
  auto strip = [&line](char open, char close) {
    if (line.size() >= 2 && line.front() == open && line.back() == close) line = text::trim(line.substr(1, line.size() - 2));
  };
  strip('[', ']');
  strip('"', '"');
  return line;
}

// Parses `[{"disease": str, "confidence": num}, ...]`, tolerating prose
// around the array and a "name" key in place of "disease".
inline std::vector<Candidate> parse_differential(const std::string& raw) {
  auto first = raw.find('[');
  auto last = raw.rfind(']');
  if (first == std::string::npos || last == std::string::npos || last < first)
    throw MalformedDifferential("no JSON array in differential response");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw.substr(first, last - first + 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedDifferential(std::string("differential is not valid JSON: ") + e.what());
  }
  std::vector<Candidate> out;
  for (const auto& e : j) {
    if (!e.is_object()) continue;
    auto name_it = e.find("disease");
    if (name_it == e.end()) name_it = e.find("name");
    auto conf_it = e.find("confidence");
    if (name_it == e.end() || !name_it->is_string() || conf_it == e.end()) continue;
    double conf = 0.0;
    if (conf_it->is_number())
      conf = conf_it->get<double>();
    else if (conf_it->is_string())
      try {
        conf = std::stod(conf_it->get<std::string>());
      } catch (...) {
        continue;
      }
    else
      continue;
    Candidate c;
    c.name = text::trim(name_it->get<std::string>());
    c.confidence = conf;
    if (!c.name.empty()) out.push_back(std::move(c));
  }
  if (out.empty()) throw MalformedDifferential("differential contains no usable candidates");
  return out;
}

// "true"/"false" verdict; whichever appears first wins, absence means false.
inline bool parse_verdict(const std::string& raw) {
  auto s = text::lower(raw);
  auto t = s.find("true");
  auto f = s.find("false");
  if (t == std::string::npos) return false;
  return f == std::string::npos || t < f;
}

}  // namespace inquire
