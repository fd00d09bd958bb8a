#pragma once

#include <set>
#include <utility>

#include "semproc/model/activity.hpp"
#include "semproc/model/language.hpp"

namespace semproc {

using Edge = std::pair<Activity, Activity>;

/// Directly-follows graph D = (A, F).
struct Dfg {
  ActivitySet nodes;
  std::set<Edge> edges;

  bool has_edge(const Activity& from, const Activity& to) const {
    return edges.contains(Edge{from, to});
  }

  void add_edge(const Activity& from, const Activity& to) {
    nodes.insert(from);
    nodes.insert(to);
    edges.emplace(from, to);
  }

  bool operator==(const Dfg&) const = default;
};

inline Dfg dfg_of_log(const EventLog& log) {
  Dfg dfg;
  dfg.nodes = log.alphabet;
  for (const auto& trace : log.traces) {
    for (const auto& a : trace) dfg.nodes.insert(a);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      dfg.edges.emplace(trace[i - 1], trace[i]);
    }
  }
  return dfg;
}

}  // namespace semproc
