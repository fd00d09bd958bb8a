#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "semproc/model/dfg.hpp"
#include "semproc/model/footprint.hpp"
#include "semproc/model/language.hpp"
#include "semproc/model/process_tree.hpp"

namespace semproc {

struct ClassScore {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct F1Result {
  double macro = 0;
  std::map<std::string, ClassScore> per_class;
};

/// Macro F1 over `classes`. A nullopt prediction is unparseable: it is a
/// false negative for its gold class and a false positive for nothing.
/// Predicted labels outside `classes` only add to precision denominators of
/// no class, and so count only as misses.
inline F1Result macro_f1(const std::vector<std::string>& golds,
                         const std::vector<std::optional<std::string>>& preds,
                         const std::set<std::string>& classes) {
  if (golds.size() != preds.size()) {
    throw std::invalid_argument("macro_f1: " + std::to_string(golds.size()) + " golds vs " +
                                std::to_string(preds.size()) + " predictions");
  }
  if (classes.empty()) throw std::invalid_argument("macro_f1: no classes");
  F1Result r;
  for (const auto& c : classes) r.per_class[c];
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto& p = preds[i];
    if (p && *p == golds[i]) {
      if (auto it = r.per_class.find(golds[i]); it != r.per_class.end()) ++it->second.tp;
      continue;
    }
    if (auto it = r.per_class.find(golds[i]); it != r.per_class.end()) ++it->second.fn;
    if (p) {
      if (auto it = r.per_class.find(*p); it != r.per_class.end()) ++it->second.fp;
    }
  }
  double sum = 0;
  for (auto& [c, s] : r.per_class) {
    s.precision = s.tp + s.fp ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
    s.recall = s.tp + s.fn ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    sum += s.f1;
  }
  r.macro = sum / static_cast<double>(r.per_class.size());
  return r;
}

// ---------------------------------------------------------------------------
// Footprint fitness

/// Share of off-diagonal cells on which two footprints over the same
/// alphabet agree. A single-activity alphabet has no such cells and scores 1.
inline double footprint_fitness(const FootprintMatrix& gold, const FootprintMatrix& discovered) {
  if (gold.alphabet() != discovered.alphabet()) {
    throw std::invalid_argument("footprint_fitness: alphabets differ");
  }
  const std::size_t n = gold.size();
  if (n == 0) throw std::invalid_argument("footprint_fitness: empty gold alphabet");
  if (n == 1) return 1.0;
  std::size_t match = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && gold.at(i, j) == discovered.at(i, j)) ++match;
    }
  }
  return static_cast<double>(match) / static_cast<double>(n * (n - 1));
}

inline double footprint_fitness(const Dfg& gold, const Dfg& discovered, const ActivitySet& alphabet) {
  return footprint_fitness(footprint_of_dfg(gold, alphabet), footprint_of_dfg(discovered, alphabet));
}

struct FitnessResult {
  double value = 0;
  bool unparseable = false;
  bool playout_overflow = false;
};

/// Behaviour of a tree as the DFG of its bounded language, or nullopt when
/// the language exceeds the cap.
inline std::optional<Dfg> tree_dfg(const ProcessTree& tree, const LanguageOptions& opt) {
  try {
    return dfg_of_log(enumerate_language(tree, opt));
  } catch (const LanguageTooLarge&) {
    return std::nullopt;
  }
}

/// Fitness of a discovered model (DFG or tree; nullptr when unparseable)
/// against a gold DFG over `alphabet`.
inline FitnessResult model_fitness(const Dfg& gold, const ActivitySet& alphabet,
                                   const Dfg* discovered_dfg, const ProcessTree* discovered_tree,
                                   const LanguageOptions& opt) {
  FitnessResult r;
  Dfg disc;
  if (discovered_dfg) {
    disc = *discovered_dfg;
  } else if (discovered_tree) {
    auto d = tree_dfg(*discovered_tree, opt);
    if (!d) {
      r.playout_overflow = true;
      return r;
    }
    disc = std::move(*d);
  } else {
    r.unparseable = true;
    return r;
  }
  r.value = footprint_fitness(gold, disc, alphabet);
  return r;
}

}  // namespace semproc
