#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semproc/model/activity.hpp"
#include "semproc/model/process_tree.hpp"

namespace semproc {

/// Multiset of traces plus the activities occurring in them.
struct EventLog {
  std::vector<Trace> traces;
  ActivitySet alphabet;

  static EventLog from_traces(std::vector<Trace> traces) {
    EventLog log;
    for (const auto& t : traces) log.alphabet.insert(t.begin(), t.end());
    log.traces = std::move(traces);
    return log;
  }
};

class LanguageTooLarge : public std::runtime_error {
 public:
  explicit LanguageTooLarge(std::size_t cap)
      : std::runtime_error("language exceeds the cap of " + std::to_string(cap) +
                           " traces"),
        cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

struct LanguageOptions {
  // Maximum number of (redo-part, do-part) repetitions per loop execution.
  std::size_t loop_redo_bound = 2;
  std::size_t trace_cap = 5000;
};

namespace detail {

using TraceSet = std::set<Trace>;

inline void insert_capped(TraceSet& set, Trace t, std::size_t cap) {
  set.insert(std::move(t));
  if (set.size() > cap) throw LanguageTooLarge(cap);
}

inline TraceSet concat(const TraceSet& a, const TraceSet& b, std::size_t cap) {
  TraceSet out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      Trace t;
      t.reserve(x.size() + y.size());
      t.insert(t.end(), x.begin(), x.end());
      t.insert(t.end(), y.begin(), y.end());
      insert_capped(out, std::move(t), cap);
    }
  }
  return out;
}

inline void interleave(const Trace& a, std::size_t i, const Trace& b, std::size_t j,
                       Trace& buf, TraceSet& out, std::size_t cap) {
  if (i == a.size() && j == b.size()) {
    insert_capped(out, buf, cap);
    return;
  }
  if (i < a.size()) {
    buf.push_back(a[i]);
    interleave(a, i + 1, b, j, buf, out, cap);
    buf.pop_back();
  }
  if (j < b.size()) {
    buf.push_back(b[j]);
    interleave(a, i, b, j + 1, buf, out, cap);
    buf.pop_back();
  }
}

inline TraceSet shuffle_product(const TraceSet& a, const TraceSet& b, std::size_t cap) {
  TraceSet out;
  Trace buf;
  for (const auto& x : a) {
    for (const auto& y : b) interleave(x, 0, y, 0, buf, out, cap);
  }
  return out;
}

// Every intermediate language is no larger than the language of the root
// (concatenation and interleaving with non-empty languages never shrink), so
// exceeding the cap anywhere means the whole tree exceeds it.
inline TraceSet language_of(const ProcessTree& node, const LanguageOptions& opt) {
  switch (node.kind()) {
    case NodeKind::Leaf:
      return TraceSet{Trace{node.activity()}};
    case NodeKind::Tau:
      return TraceSet{Trace{}};
    case NodeKind::Choice: {
      TraceSet out;
      for (const auto& c : node.children()) {
        for (auto& t : language_of(c, opt)) insert_capped(out, t, opt.trace_cap);
      }
      return out;
    }
    case NodeKind::Sequence: {
      TraceSet acc{Trace{}};
      for (const auto& c : node.children()) {
        acc = concat(acc, language_of(c, opt), opt.trace_cap);
      }
      return acc;
    }
    case NodeKind::Parallel: {
      TraceSet acc{Trace{}};
      for (const auto& c : node.children()) {
        acc = shuffle_product(acc, language_of(c, opt), opt.trace_cap);
      }
      return acc;
    }
    case NodeKind::Loop: {
      const TraceSet body = language_of(node.children()[0], opt);
      const TraceSet redo = language_of(node.children()[1], opt);
      TraceSet all = body;
      TraceSet frontier = body;
      for (std::size_t k = 0; k < opt.loop_redo_bound; ++k) {
        frontier = concat(concat(frontier, redo, opt.trace_cap), body, opt.trace_cap);
        for (const auto& t : frontier) insert_capped(all, t, opt.trace_cap);
      }
      return all;
    }
  }
  return {};
}

}  // namespace detail

/// All traces of the tree when every loop repeats at most
/// `loop_redo_bound` times, sorted lexicographically by label. Throws
/// LanguageTooLarge when more than `trace_cap` distinct traces exist.
inline EventLog enumerate_language(const ProcessTree& tree,
                                   const LanguageOptions& opt = {}) {
  auto set = detail::language_of(tree, opt);
  return EventLog::from_traces(std::vector<Trace>(set.begin(), set.end()));
}

// ---------------------------------------------------------------------------

struct EfPair {
  Activity earlier;
  Activity later;
  auto operator<=>(const EfPair&) const = default;
  bool operator==(const EfPair&) const = default;
};

/// Eventually-follows pairs (a_i, a_j), i < j, as a set of label pairs.
inline std::set<EfPair> ef_pairs(const Trace& trace) {
  std::set<EfPair> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    for (std::size_t j = i + 1; j < trace.size(); ++j) {
      out.insert(EfPair{trace[i], trace[j]});
    }
  }
  return out;
}

inline std::set<EfPair> ef_pairs(const EventLog& log) {
  std::set<EfPair> out;
  for (const auto& t : log.traces) out.merge(ef_pairs(t));
  return out;
}

}  // namespace semproc
