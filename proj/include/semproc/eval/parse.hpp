#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semproc/instructions/templates.hpp"
#include "semproc/model/dfg.hpp"
#include "semproc/model/process_tree.hpp"
#include "semproc/taskgen/task.hpp"

namespace semproc {

enum class OutputKind { Bool, Activity, Trace, Dfg, Tree };

/// What an answer to (task, variant) should look like.
constexpr OutputKind expected_kind(TaskKind task, VariantTag v) {
  switch (task) {
    case TaskKind::TSad:
      return v == VariantTag::Normal ? OutputKind::Bool : OutputKind::Trace;
    case TaskKind::ASad:
      return v == VariantTag::Normal ? OutputKind::Bool : OutputKind::Activity;
    case TaskKind::SNap:
      return v == VariantTag::PositiveInversion ? OutputKind::Trace : OutputKind::Activity;
    case TaskKind::SDfd: return OutputKind::Dfg;
    case TaskKind::SPtd: return OutputKind::Tree;
  }
  return OutputKind::Bool;
}

struct Unparseable {
  bool operator==(const Unparseable&) const = default;
};

struct ParsedOutput {
  TaskKind task = TaskKind::TSad;
  std::variant<Unparseable, bool, Activity, Trace, Dfg, ProcessTree> value;
  std::string raw;

  bool parsed() const { return !std::holds_alternative<Unparseable>(value); }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(trim(s.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

/// Removes code fences and a leading "Answer:"-style prefix.
inline std::string strip_boilerplate(std::string_view raw) {
  std::string_view s = trim(raw);
  if (auto open = s.find("```"); open != std::string_view::npos) {
    auto body = s.substr(open + 3);
    // Drop a language tag on the fence line.
    if (auto nl = body.find('\n'); nl != std::string_view::npos &&
                                   body.substr(0, nl).find_first_of(" '[(") == std::string_view::npos) {
      body = body.substr(nl + 1);
    }
    if (auto close = body.find("```"); close != std::string_view::npos) body = body.substr(0, close);
    s = trim(body);
  }
  for (std::string_view prefix : {"answer:", "output:", "response:", "final answer:"}) {
    if (lower(s.substr(0, prefix.size())) == prefix) {
      s = trim(s.substr(prefix.size()));
      break;
    }
  }
  return std::string(s);
}

inline std::optional<bool> parse_bool(std::string_view text) {
  bool t = false, f = false;
  std::string word;
  auto flush = [&] {
    if (word == "true") t = true;
    if (word == "false") f = true;
    word.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  if (t == f) return std::nullopt;
  return t;
}

// Longest label occurring in the text; exact case first, then ignoring case.
inline std::optional<Activity> parse_activity(std::string_view text, const ActivitySet& acts) {
  const Activity* best = nullptr;
  for (const auto& a : acts) {
    if (text.find(a.label()) != std::string_view::npos &&
        (!best || a.label().size() > best->label().size())) {
      best = &a;
    }
  }
  if (best) return *best;
  const std::string lt = lower(text);
  for (const auto& a : acts) {
    if (lt.find(lower(a.label())) != std::string::npos &&
        (!best || a.label().size() > best->label().size())) {
      best = &a;
    }
  }
  if (best) return *best;
  return std::nullopt;
}

inline std::optional<Activity> match_label(std::string_view item, const ActivitySet& acts) {
  item = trim(item);
  while (!item.empty() && (item.front() == '\'' || item.front() == '"' || item.front() == '`')) {
    item.remove_prefix(1);
  }
  while (!item.empty() && (item.back() == '\'' || item.back() == '"' || item.back() == '`' ||
                           item.back() == '.')) {
    item.remove_suffix(1);
  }
  item = trim(item);
  if (item.empty()) return std::nullopt;
  for (const auto& a : acts) {
    if (a.label() == item) return a;
  }
  const std::string li = lower(item);
  for (const auto& a : acts) {
    if (lower(a.label()) == li) return a;
  }
  return std::nullopt;
}

// `['a', 'b']`; an unquoted comma list is accepted when every item is a
// known label.
inline std::optional<Trace> parse_trace(std::string_view text, const ActivitySet& acts) {
  const auto open = text.find('[');
  const auto close = text.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  const std::string_view inner = text.substr(open + 1, close - open - 1);
  if (trim(inner).empty()) return Trace{};
  try {
    notation::Cursor cur(inner);
    Trace out;
    for (;;) {
      cur.skip_ws();
      auto label = cur.quoted();
      if (!label || label->empty()) break;
      out.emplace_back(*label);
      cur.skip_ws();
      if (cur.at_end()) return out;
      if (!cur.consume(",")) break;
    }
  } catch (const std::exception&) {
  }
  Trace out;
  std::size_t start = 0;
  while (start <= inner.size()) {
    auto end = inner.find(',', start);
    if (end == std::string_view::npos) end = inner.size();
    auto a = match_label(inner.substr(start, end - start), acts);
    if (!a) return std::nullopt;
    out.push_back(*a);
    start = end + 1;
  }
  return out;
}

inline std::optional<Edge> parse_edge_unquoted(std::string_view item) {
  const auto arrow = item.find("->");
  if (arrow == std::string_view::npos) return std::nullopt;
  auto clean = [](std::string_view s) {
    s = trim(s);
    while (!s.empty() && std::string_view("-*•'\"`(").find(s.front()) != std::string_view::npos) {
      s.remove_prefix(1);
      s = trim(s);
    }
    while (!s.empty() && std::string_view("'\"`),.;").find(s.back()) != std::string_view::npos) {
      s.remove_suffix(1);
      s = trim(s);
    }
    return s;
  };
  auto x = clean(item.substr(0, arrow));
  auto y = clean(item.substr(arrow + 2));
  if (x.empty() || y.empty() || y.find("->") != std::string_view::npos) return std::nullopt;
  return Edge{Activity(std::string(x)), Activity(std::string(y))};
}

// One or more `'x' -> 'y'` pairs on a line, separated by commas or
// semicolons. Falls back to splitting unquoted text.
inline std::vector<Edge> parse_edge_line(std::string_view line) {
  std::vector<Edge> out;
  const auto first_quote = line.find('\'');
  if (first_quote != std::string_view::npos) {
    try {
      notation::Cursor cur(line.substr(first_quote));
      for (;;) {
        cur.skip_ws();
        auto x = cur.quoted();
        cur.skip_ws();
        if (!x || !cur.consume("->")) break;
        cur.skip_ws();
        auto y = cur.quoted();
        if (!y || x->empty() || y->empty()) break;
        out.emplace_back(Activity(*x), Activity(*y));
        cur.skip_ws();
        if (!cur.consume(",") && !cur.consume(";")) break;
      }
    } catch (const std::exception&) {
    }
    if (!out.empty()) return out;
  }
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find_first_of(",;", start);
    if (end == std::string_view::npos) end = line.size();
    if (auto e = parse_edge_unquoted(line.substr(start, end - start))) out.push_back(*e);
    start = end + 1;
  }
  return out;
}

inline std::optional<Dfg> parse_dfg(std::string_view text) {
  Dfg d;
  bool none = false;
  for (auto line : lines_of(text)) {
    if (line.find("->") == std::string_view::npos) {
      std::string l = lower(line);
      while (!l.empty() && (l.back() == '.' || l.back() == '\'')) l.pop_back();
      if (l == "none" || l == "'none") none = true;
      continue;
    }
    try {
      for (const auto& [x, y] : parse_edge_line(line)) d.add_edge(x, y);
    } catch (const std::invalid_argument&) {
    }
  }
  if (d.edges.empty() && !none) return std::nullopt;
  return d;
}

inline std::optional<ProcessTree> parse_tree_output(std::string_view text) {
  auto attempt = [](std::string_view s) -> std::optional<ProcessTree> {
    s = trim(s);
    while (!s.empty() && s.back() == '.') s.remove_suffix(1);
    try {
      return parse_tree(s);
    } catch (const TreeParseError&) {
      return std::nullopt;
    }
  };
  if (auto t = attempt(text)) return t;
  for (auto line : lines_of(text)) {
    if (auto t = attempt(line)) return t;
  }
  return std::nullopt;
}

}  // namespace detail

/// Extracts a task answer from free-form model output. Never throws on bad
/// input; anything that cannot be read becomes Unparseable.
inline ParsedOutput parse_output(TaskKind task, VariantTag variant, std::string_view raw,
                                 const ActivitySet& activity_set) {
  ParsedOutput out;
  out.task = task;
  out.raw = std::string(raw);
  const std::string text = detail::strip_boilerplate(raw);
  if (text.empty()) return out;
  switch (expected_kind(task, variant)) {
    case OutputKind::Bool:
      if (auto b = detail::parse_bool(text)) out.value = *b;
      break;
    case OutputKind::Activity:
      if (auto a = detail::parse_activity(text, activity_set)) out.value = *a;
      break;
    case OutputKind::Trace:
      if (auto t = detail::parse_trace(text, activity_set)) out.value = std::move(*t);
      break;
    case OutputKind::Dfg:
      if (auto d = detail::parse_dfg(text)) out.value = std::move(*d);
      break;
    case OutputKind::Tree:
      if (auto t = detail::parse_tree_output(text)) out.value = std::move(*t);
      break;
  }
  return out;
}

inline ParsedOutput parse_output(TaskKind task, std::string_view raw, const ActivitySet& activity_set) {
  return parse_output(task, VariantTag::Normal, raw, activity_set);
}

}  // namespace semproc
