#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "semproc/model/dfg.hpp"

namespace semproc {

enum class Relation { Precedes, Follows, Parallel, Unrelated };

constexpr std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Precedes: return "->";
    case Relation::Follows: return "<-";
    case Relation::Parallel: return "||";
    case Relation::Unrelated: return "#";
  }
  return "?";
}

/// Pairwise behavioural relations over an ordered alphabet, row-major.
class FootprintMatrix {
 public:
  FootprintMatrix(std::vector<Activity> alphabet, std::vector<Relation> cells)
      : alphabet_(std::move(alphabet)), cells_(std::move(cells)) {
    if (cells_.size() != alphabet_.size() * alphabet_.size()) {
      throw std::invalid_argument("footprint cell count does not match alphabet");
    }
  }

  const std::vector<Activity>& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_.size(); }

  Relation at(std::size_t row, std::size_t col) const {
    return cells_[row * alphabet_.size() + col];
  }

  Relation at(const Activity& x, const Activity& y) const {
    return at(index_of(x), index_of(y));
  }

  std::size_t index_of(const Activity& a) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), a);
    if (it == alphabet_.end() || *it != a) {
      throw std::out_of_range("activity not in footprint alphabet: " + a.label());
    }
    return static_cast<std::size_t>(it - alphabet_.begin());
  }

  bool operator==(const FootprintMatrix&) const = default;

 private:
  std::vector<Activity> alphabet_;  // sorted
  std::vector<Relation> cells_;
};

/// Footprint of a DFG restricted to `alphabet`; edges touching activities
/// outside the alphabet are ignored.
inline FootprintMatrix footprint_of_dfg(const Dfg& dfg, const ActivitySet& alphabet) {
  std::vector<Activity> acts(alphabet.begin(), alphabet.end());
  const std::size_t n = acts.size();
  std::vector<Relation> cells(n * n, Relation::Unrelated);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool xy = dfg.has_edge(acts[i], acts[j]);
      const bool yx = dfg.has_edge(acts[j], acts[i]);
      Relation r = Relation::Unrelated;
      if (xy && yx) r = Relation::Parallel;
      else if (xy) r = Relation::Precedes;
      else if (yx) r = Relation::Follows;
      cells[i * n + j] = r;
    }
  }
  return FootprintMatrix(std::move(acts), std::move(cells));
}

}  // namespace semproc
