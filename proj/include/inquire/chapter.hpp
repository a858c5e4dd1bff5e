#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace inquire {

// ICD chapter of a diagnosis, or unknown when the name did not resolve.
struct ChapterId {
  std::optional<int> id;

  static ChapterId unknown() { return {}; }
  static ChapterId of(int chapter) { return {chapter}; }

  bool known() const { return id.has_value(); }
  bool operator==(const ChapterId&) const = default;
};

inline std::string to_string(const ChapterId& c) {
  return c.id ? std::to_string(*c.id) : std::string("unknown");
}

inline nlohmann::json to_json(const ChapterId& c) {
  return c.id ? nlohmann::json(*c.id) : nlohmann::json("unknown");
}

inline ChapterId chapter_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return ChapterId::of(j.get<int>());
  return ChapterId::unknown();
}

}  // namespace inquire
