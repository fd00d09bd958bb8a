#pragma once

#include <set>
#include <string>

#include "semproc/model/activity.hpp"
#include "semproc/model/dfg.hpp"
#include "semproc/model/process_tree.hpp"
#include "semproc/taskgen/task.hpp"

namespace semproc {

// Output grammars. Binary tasks answer True/False, activity answers are the
// bare label, traces are bracketed lists of quoted labels, DFG answers are
// one `'x' -> 'y'` line per edge (or `none`), trees use the tree notation.

inline std::string render_bool(bool value) { return value ? "True" : "False"; }

inline std::string render_label(AnomalyLabel l) { return render_bool(l == AnomalyLabel::Valid); }

template <typename Range>
std::string render_list(const Range& activities) {
  std::string out = "[";
  bool first = true;
  for (const auto& a : activities) {
    if (!first) out += ", ";
    first = false;
    out += quote_label(a.label());
  }
  out += "]";
  return out;
}

inline std::string render_edges(const std::set<Edge>& edges) {
  if (edges.empty()) return "none";
  std::string out;
  for (const auto& [x, y] : edges) {
    if (!out.empty()) out.push_back('\n');
    out += quote_label(x.label()) + " -> " + quote_label(y.label());
  }
  return out;
}

}  // namespace semproc
