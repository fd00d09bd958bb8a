#pragma once

#include <compare>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace semproc {

/// A named process step. Labels compare by exact string equality.
class Activity {
 public:
  Activity() = default;
  explicit Activity(std::string label) : label_(std::move(label)) {
    if (label_.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw std::invalid_argument("activity label is empty");
    }
  }

  const std::string& label() const { return label_; }

  auto operator<=>(const Activity&) const = default;
  bool operator==(const Activity&) const = default;

 private:
  std::string label_;
};

using Trace = std::vector<Activity>;
using ActivitySet = std::set<Activity>;

inline void to_json(nlohmann::json& j, const Activity& a) { j = a.label(); }
inline void from_json(const nlohmann::json& j, Activity& a) {
  a = Activity(j.get<std::string>());
}

inline Trace make_trace(std::initializer_list<std::string_view> labels) {
  Trace t;
  for (auto l : labels) t.emplace_back(std::string(l));
  return t;
}

inline ActivitySet alphabet_of(const Trace& trace) {
  return ActivitySet(trace.begin(), trace.end());
}

}  // namespace semproc
