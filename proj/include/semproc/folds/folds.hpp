#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "semproc/instructions/compile.hpp"
#include "semproc/taskgen/task.hpp"
#include "semproc/util/io.hpp"
#include "semproc/util/random.hpp"

namespace semproc {

enum class Split { Train, Validation, Test };

constexpr std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

class TooFewModels : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyPool : public std::invalid_argument {
 public:
  explicit EmptyPool(TaskKind task)
      : std::invalid_argument("empty training pool for " + std::string(task_name(task))) {}
};

/// model_id -> split. One assignment covers all tasks, so a model never
/// lands in different splits for different tasks.
using SplitAssignment = std::map<std::string, Split>;

struct SplitCounts {
  std::size_t train = 0, validation = 0, test = 0;
};

/// 70/20/10 with each share floored; leftovers go to train, then validation.
constexpr SplitCounts split_counts(std::size_t n) {
  SplitCounts c{n * 7 / 10, n * 2 / 10, n / 10};
  std::size_t rest = n - c.train - c.validation - c.test;
  if (rest > 0) {
    ++c.train;
    --rest;
  }
  c.validation += rest;
  return c;
}

inline SplitAssignment split_models(const std::set<std::string>& model_ids, std::uint64_t seed) {
  if (model_ids.size() < 10) {
    throw TooFewModels("need at least 10 models to split, got " + std::to_string(model_ids.size()));
  }
  std::vector<std::string> ids(model_ids.begin(), model_ids.end());
  Rng rng(derive_seed(seed, fnv1a64("split-models")));
  rng.shuffle(ids);
  const SplitCounts c = split_counts(ids.size());
  SplitAssignment out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[ids[i]] = i < c.train ? Split::Train : i < c.train + c.validation ? Split::Validation : Split::Test;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixing

struct MixingPolicy {
  std::size_t default_cap = 30000;
  std::size_t snap_discovery_cap = 60000;

  std::size_t cap_for(TaskKind task, GroupKind held_out) const {
    if (task == TaskKind::SNap && held_out == GroupKind::Discovery) return snap_discovery_cap;
    return default_cap;
  }
};

struct MixEntry {
  std::size_t pool = 0;
  std::size_t cap = 0;
  std::size_t count = 0;
};

template <typename T>
struct MixedSample {
  std::vector<T> items;
  std::map<TaskKind, MixEntry> entries;

  std::size_t total() const { return items.size(); }
};

/// Examples-proportional mixing: each task contributes min(pool, cap) items
/// drawn uniformly without replacement; the combined list is shuffled.
template <typename T>
MixedSample<T> sample_mixed(const std::map<TaskKind, std::vector<T>>& pools, const MixingPolicy& policy,
                            GroupKind held_out, std::uint64_t seed) {
  MixedSample<T> out;
  for (const auto& [task, pool] : pools) {
    if (pool.empty()) throw EmptyPool(task);
    const std::size_t cap = policy.cap_for(task, held_out);
    if (cap == 0) throw std::invalid_argument("mixing cap must be positive");
    const std::size_t k = std::min(pool.size(), cap);
    out.entries[task] = {pool.size(), cap, k};

    Rng rng(derive_seed(seed, fnv1a64("mix:" + std::string(task_name(task)))));
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) out.items.push_back(pool[i]);
  }
  Rng rng(derive_seed(seed, fnv1a64("mix:order")));
  rng.shuffle(out.items);
  return out;
}

// ---------------------------------------------------------------------------
// Folds

struct Fold {
  GroupKind held_out = GroupKind::Anomaly;
  std::vector<InstructionInstance> train;
  std::vector<InstructionInstance> validation;
  std::vector<InstructionInstance> test;
  json manifest;
};

namespace detail {

inline json variant_shares(const std::vector<InstructionInstance>& xs, TaskKind task, std::size_t total) {
  std::map<VariantTag, std::size_t> n;
  for (const auto& x : xs) {
    if (x.task == task) ++n[x.variant];
  }
  json j = json::object();
  for (auto v : kAllVariants) {
    j[std::string(variant_name(v))] = total ? 100.0 * static_cast<double>(n[v]) / static_cast<double>(total) : 0.0;
  }
  return j;
}

inline json model_ids(const std::vector<InstructionInstance>& xs) {
  std::set<std::string> ids;
  for (const auto& x : xs) ids.insert(x.model_id);
  return ids;
}

inline json task_counts(const std::vector<InstructionInstance>& xs) {
  std::map<std::string, std::size_t> n;
  for (const auto& x : xs) ++n[std::string(task_name(x.task))];
  return n;
}

}  // namespace detail

/// Train from the in-fold tasks' train splits (mixed); validation and test
/// from the held-out tasks, unsampled. Held-out splits keep only normal
/// instances since inversions have no scoring target.
inline Fold build_fold(GroupKind held_out, const std::vector<InstructionInstance>& instances,
                       const SplitAssignment& splits, const MixingPolicy& policy, std::uint64_t seed) {
  const auto held = tasks_in(held_out);
  auto is_held = [&](TaskKind t) { return std::find(held.begin(), held.end(), t) != held.end(); };
  auto split_of = [&](const std::string& model_id) {
    auto it = splits.find(model_id);
    if (it == splits.end()) throw std::invalid_argument("model without split assignment: " + model_id);
    return it->second;
  };

  Fold fold;
  fold.held_out = held_out;
  std::map<TaskKind, std::vector<InstructionInstance>> pools;
  for (auto t : kAllTasks) {
    if (!is_held(t)) pools[t];
  }
  for (const auto& x : instances) {
    const Split s = split_of(x.model_id);
    if (!is_held(x.task)) {
      if (s == Split::Train) pools[x.task].push_back(x);
    } else if (x.variant == VariantTag::Normal) {
      if (s == Split::Validation) fold.validation.push_back(x);
      if (s == Split::Test) fold.test.push_back(x);
    }
  }
  auto mixed = sample_mixed(pools, policy, held_out, derive_seed(seed, static_cast<std::uint64_t>(held_out)));
  fold.train = std::move(mixed.items);

  json train = json::object();
  const std::size_t total = fold.train.size();
  for (const auto& [task, e] : mixed.entries) {
    train[std::string(task_name(task))] = {
        {"pool", e.pool},
        {"cap", e.cap},
        {"count", e.count},
        {"share", total ? 100.0 * static_cast<double>(e.count) / static_cast<double>(total) : 0.0},
        {"variant_share", detail::variant_shares(fold.train, task, total)}};
  }
  fold.manifest = {{"held_out", group_name(held_out)},
                   {"seed", seed},
                   {"joint_model_buckets", true},
                   {"caps", {{"default", policy.default_cap}, {"snap_when_discovery_held_out", policy.snap_discovery_cap}}},
                   {"train", std::move(train)},
                   {"train_total", total},
                   {"validation", detail::task_counts(fold.validation)},
                   {"test", detail::task_counts(fold.test)},
                   {"models",
                    {{"train", detail::model_ids(fold.train)},
                     {"validation", detail::model_ids(fold.validation)},
                     {"test", detail::model_ids(fold.test)}}}};
  return fold;
}

inline std::string fold_dir_name(GroupKind g) { return "fold-" + std::string(group_name(g)); }

/// Writes train/validation/test JSONL and the manifest under
/// `root/fold-<group>/`, each file atomically.
inline void write_fold(const fs::path& root, const Fold& fold) {
  const fs::path dir = root / fold_dir_name(fold.held_out);
  write_file_atomic(dir / "train.jsonl", to_jsonl(fold.train));
  write_file_atomic(dir / "validation.jsonl", to_jsonl(fold.validation));
  write_file_atomic(dir / "test.jsonl", to_jsonl(fold.test));
  write_file_atomic(dir / "manifest.json", fold.manifest.dump(2) + "\n");
}

}  // namespace semproc
