#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "semproc/model/dfg.hpp"
#include "semproc/model/language.hpp"
#include "semproc/model/process_tree.hpp"
#include "semproc/taskgen/task.hpp"
#include "semproc/util/io.hpp"
#include "semproc/util/random.hpp"

namespace semproc {

struct GenOptions {
  LanguageOptions language;
  // Valid traces sampled per model for T-SAD and S-NAP.
  std::size_t valid_trace_cap = 50;
  std::size_t anomaly_attempts = 20;
};

/// Instances produced for one model, or the reason the model was skipped.
struct Generated {
  std::vector<TaskInstance> instances;
  std::optional<std::string> skipped;
};

namespace detail {

inline std::uint64_t task_stream(std::uint64_t seed, const std::string& model_id,
                                 TaskKind kind) {
  return derive_seed(seed, fnv1a64(std::string(task_name(kind)) + '\x1f' + model_id));
}

inline std::vector<Trace> sample_nonempty(const EventLog& log, Rng& rng, std::size_t cap) {
  std::vector<Trace> pool;
  for (const auto& t : log.traces) {
    if (!t.empty()) pool.push_back(t);
  }
  rng.shuffle(pool);
  if (pool.size() > cap) pool.resize(cap);
  return pool;
}

inline TaskInstance base_instance(TaskKind kind, const std::string& model_id,
                                  const ActivitySet& acts, std::uint64_t seed) {
  TaskInstance t;
  t.kind = kind;
  t.model_id = model_id;
  t.activity_set = acts;
  t.seed = seed;
  return t;
}

}  // namespace detail

enum class Perturbation { Swap, Delete, Insert };

/// One random perturbation of `trace`; nullopt when the chosen operator does
/// not apply (e.g. swap on a single-activity trace).
inline std::optional<Trace> perturb_trace(const Trace& trace, const std::vector<Activity>& alphabet,
                                          Rng& rng) {
  const auto op = static_cast<Perturbation>(rng.index(3));
  Trace t = trace;
  const std::size_t n = t.size();
  switch (op) {
    case Perturbation::Swap: {
      if (n < 2) return std::nullopt;
      std::size_t i = rng.index(n);
      std::size_t j = rng.index(n - 1);
      if (j >= i) ++j;
      if (t[i] == t[j]) return std::nullopt;
      std::swap(t[i], t[j]);
      return t;
    }
    case Perturbation::Delete: {
      if (n < 2) return std::nullopt;
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(rng.index(n)));
      return t;
    }
    case Perturbation::Insert: {
      if (alphabet.empty()) return std::nullopt;
      const std::size_t pos = rng.index(n + 1);
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(pos), alphabet[rng.index(alphabet.size())]);
      return t;
    }
  }
  return std::nullopt;
}

/// T-SAD: sampled language traces labeled Valid, perturbed traces verified to
/// lie outside the bounded language labeled Anomalous; exactly balanced.
inline Generated gen_tsad(const ProcessTree& tree, const std::string& model_id,
                          std::uint64_t seed, const GenOptions& opt = {}) {
  const ActivitySet acts = activities_of(tree);
  if (acts.size() < 2) return {{}, "fewer than two distinct activities"};
  const EventLog log = enumerate_language(tree, opt.language);
  const std::set<Trace> lang(log.traces.begin(), log.traces.end());
  const std::vector<Activity> alphabet(acts.begin(), acts.end());

  Rng rng(detail::task_stream(seed, model_id, TaskKind::TSad));
  std::vector<Trace> valid = detail::sample_nonempty(log, rng, opt.valid_trace_cap);

  std::vector<Trace> anomalous;
  std::set<Trace> seen;
  for (const auto& v : valid) {
    for (std::size_t attempt = 0; attempt < opt.anomaly_attempts; ++attempt) {
      auto p = perturb_trace(v, alphabet, rng);
      if (!p || p->empty() || lang.contains(*p) || seen.contains(*p)) continue;
      seen.insert(*p);
      anomalous.push_back(std::move(*p));
      break;
    }
  }
  if (anomalous.empty()) return {{}, "no verifiable anomalous trace"};

  const std::size_t n = std::min(valid.size(), anomalous.size());
  Generated out;
  for (std::size_t i = 0; i < n; ++i) {
    auto t = detail::base_instance(TaskKind::TSad, model_id, acts, seed);
    t.payload = TracePayload{valid[i]};
    t.gold = AnomalyLabel::Valid;
    out.instances.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto t = detail::base_instance(TaskKind::TSad, model_id, acts, seed);
    t.payload = TracePayload{anomalous[i]};
    t.gold = AnomalyLabel::Anomalous;
    out.instances.push_back(std::move(t));
  }
  return out;
}

/// A-SAD: eventually-follows pairs of the bounded language are Valid; a
/// reversed pair (y, x) is Anomalous when (x, y) occurs and (y, x) never does.
inline Generated gen_asad(const ProcessTree& tree, const std::string& model_id,
                          std::uint64_t seed, const GenOptions& opt = {}) {
  const ActivitySet acts = activities_of(tree);
  if (acts.size() < 2) return {{}, "fewer than two distinct activities"};
  const EventLog log = enumerate_language(tree, opt.language);

  std::set<EfPair> ef;
  for (auto& p : ef_pairs(log)) {
    if (p.earlier != p.later) ef.insert(p);
  }
  std::vector<EfPair> valid(ef.begin(), ef.end());
  std::vector<EfPair> anomalous;
  for (const auto& p : ef) {
    EfPair rev{p.later, p.earlier};
    if (!ef.contains(rev)) anomalous.push_back(rev);
  }
  if (anomalous.empty()) return {{}, "every ordering is admitted by the language"};

  Rng rng(detail::task_stream(seed, model_id, TaskKind::ASad));
  rng.shuffle(valid);
  rng.shuffle(anomalous);
  const std::size_t n = std::min(valid.size(), anomalous.size());

  Generated out;
  auto emit = [&](const EfPair& p, AnomalyLabel label) {
    auto t = detail::base_instance(TaskKind::ASad, model_id, acts, seed);
    t.payload = PairPayload{p.earlier, p.later};
    t.gold = label;
    out.instances.push_back(std::move(t));
  };
  for (std::size_t i = 0; i < n; ++i) emit(valid[i], AnomalyLabel::Valid);
  for (std::size_t i = 0; i < n; ++i) emit(anomalous[i], AnomalyLabel::Anomalous);
  return out;
}

/// S-NAP: every strict prefix (length >= 1) of each sampled trace, with the
/// next activity as gold.
inline Generated gen_snap(const ProcessTree& tree, const std::string& model_id,
                          std::uint64_t seed, const GenOptions& opt = {}) {
  const ActivitySet acts = activities_of(tree);
  if (acts.size() < 2) return {{}, "fewer than two distinct activities"};
  const EventLog log = enumerate_language(tree, opt.language);
  const std::set<Trace> lang(log.traces.begin(), log.traces.end());

  std::map<Trace, ActivitySet> continuations;
  for (const auto& t : log.traces) {
    Trace prefix;
    for (const auto& a : t) {
      continuations[prefix].insert(a);
      prefix.push_back(a);
    }
  }

  Rng rng(detail::task_stream(seed, model_id, TaskKind::SNap));
  const std::vector<Trace> sampled = detail::sample_nonempty(log, rng, opt.valid_trace_cap);

  Generated out;
  for (const auto& trace : sampled) {
    for (std::size_t k = 1; k < trace.size(); ++k) {
      PrefixPayload p;
      p.prefix.assign(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(k));
      p.prefix_completes = lang.contains(p.prefix);
      const ActivitySet& next = continuations[p.prefix];
      std::set_difference(acts.begin(), acts.end(), next.begin(), next.end(),
                          std::inserter(p.impossible_next, p.impossible_next.end()));
      auto t = detail::base_instance(TaskKind::SNap, model_id, acts, seed);
      t.payload = std::move(p);
      t.gold = trace[k];
      out.instances.push_back(std::move(t));
    }
  }
  return out;
}

/// S-DFD and S-PTD instances for one model: the DFG of the bounded language
/// and the tree itself.
inline std::pair<TaskInstance, TaskInstance> gen_discovery(const ProcessTree& tree,
                                                           const std::string& model_id,
                                                           std::uint64_t seed,
                                                           const GenOptions& opt = {}) {
  const ActivitySet acts = activities_of(tree);
  auto dfd = detail::base_instance(TaskKind::SDfd, model_id, acts, seed);
  Dfg dfg = dfg_of_log(enumerate_language(tree, opt.language));
  dfg.nodes.insert(acts.begin(), acts.end());
  dfd.gold = std::move(dfg);
  auto ptd = detail::base_instance(TaskKind::SPtd, model_id, acts, seed);
  ptd.gold = tree;
  return {std::move(dfd), std::move(ptd)};
}

// ---------------------------------------------------------------------------
// Deduplication

inline std::string dedup_key(const TaskInstance& t) {
  json key = json::array({t.activity_set});
  switch (t.kind) {
    case TaskKind::TSad:
      key.push_back(std::get<TracePayload>(t.payload).trace);
      break;
    case TaskKind::ASad: {
      const auto& p = std::get<PairPayload>(t.payload);
      key.push_back(json::array({p.first, p.second}));
      break;
    }
    case TaskKind::SNap:
      key.push_back(std::get<PrefixPayload>(t.payload).prefix);
      key.push_back(gold_to_json(t.gold));
      break;
    case TaskKind::SDfd:
    case TaskKind::SPtd:
      break;
  }
  return key.dump();
}

inline void sort_by_model_then_payload(std::vector<TaskInstance>& xs) {
  std::vector<std::string> payloads;
  payloads.reserve(xs.size());
  for (const auto& x : xs) {
    payloads.push_back(payload_to_json(x.payload).dump() + '\x1f' + gold_to_json(x.gold).dump());
  }
  std::vector<std::size_t> idx(xs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(xs[a].model_id, payloads[a]) < std::tie(xs[b].model_id, payloads[b]);
  });
  std::vector<TaskInstance> sorted;
  sorted.reserve(xs.size());
  for (auto i : idx) sorted.push_back(std::move(xs[i]));
  xs = std::move(sorted);
}

/// Task-specific duplicate removal. All instances must share one kind; the
/// first occurrence after sorting by (model_id, payload) survives.
inline std::vector<TaskInstance> dedup(std::vector<TaskInstance> instances) {
  if (instances.empty()) return instances;
  const TaskKind kind = instances.front().kind;
  for (const auto& t : instances) {
    if (t.kind != kind) throw std::invalid_argument("dedup: mixed task kinds");
  }
  sort_by_model_then_payload(instances);
  std::set<std::string> seen;
  std::vector<TaskInstance> out;
  for (auto& t : instances) {
    if (kind == TaskKind::SNap && std::get<PrefixPayload>(t.payload).prefix_completes) continue;
    if (seen.insert(dedup_key(t)).second) out.push_back(std::move(t));
  }
  return out;
}

/// Output order for task files: (model_id, payload hash).
inline void sort_for_output(std::vector<TaskInstance>& xs) {
  std::vector<std::tuple<std::string, std::uint64_t, std::string>> keys;
  keys.reserve(xs.size());
  for (const auto& x : xs) {
    std::string p = payload_to_json(x.payload).dump() + '\x1f' + gold_to_json(x.gold).dump();
    keys.emplace_back(x.model_id, fnv1a64(p), std::move(p));
  }
  std::vector<std::size_t> idx(xs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<TaskInstance> sorted;
  sorted.reserve(xs.size());
  for (auto i : idx) sorted.push_back(std::move(xs[i]));
  xs = std::move(sorted);
}

// ---------------------------------------------------------------------------
// Corpus

struct CorpusEntry {
  std::string model_id;
  ProcessTree tree;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One model per line: `<model-id>\t<tree>`. Blank lines and lines starting
/// with '#' are ignored.
inline std::vector<CorpusEntry> parse_corpus(std::string_view text, const std::string& source = "corpus") {
  std::vector<CorpusEntry> out;
  std::set<std::string> ids;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;
    const auto tab = line.find('\t');
    const std::string where = source + ":" + std::to_string(lineno);
    if (tab == std::string_view::npos || tab == 0) {
      throw CorpusError(where + ": expected <model-id><TAB><tree>");
    }
    std::string id(line.substr(0, tab));
    if (!ids.insert(id).second) throw CorpusError(where + ": duplicate model id " + id);
    try {
      out.push_back({std::move(id), parse_tree(line.substr(tab + 1))});
    } catch (const TreeParseError& e) {
      throw CorpusError(where + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<CorpusEntry> read_corpus(const fs::path& path) {
  return parse_corpus(read_file(path), path.string());
}

struct CorpusDatasets {
  std::map<TaskKind, std::vector<TaskInstance>> by_task;
  // (task, model_id) -> reason
  std::vector<std::tuple<TaskKind, std::string, std::string>> skipped;
};

/// Runs all generators over the corpus, deduplicates, and sorts for output.
inline CorpusDatasets generate_corpus(const std::vector<CorpusEntry>& corpus, std::uint64_t seed,
                                      const GenOptions& opt = {}) {
  CorpusDatasets out;
  for (auto k : kAllTasks) out.by_task[k];
  for (const auto& entry : corpus) {
    const std::uint64_t model_seed = derive_seed(seed, fnv1a64(entry.model_id));
    try {
      enumerate_language(entry.tree, opt.language);
    } catch (const LanguageTooLarge& e) {
      log_warning("skipping model " + entry.model_id + ": " + e.what());
      for (auto k : kAllTasks) out.skipped.emplace_back(k, entry.model_id, e.what());
      continue;
    }
    auto add = [&](TaskKind k, Generated g) {
      if (g.skipped) {
        out.skipped.emplace_back(k, entry.model_id, *g.skipped);
        return;
      }
      auto& dst = out.by_task[k];
      for (auto& t : g.instances) dst.push_back(std::move(t));
    };
    add(TaskKind::TSad, gen_tsad(entry.tree, entry.model_id, model_seed, opt));
    add(TaskKind::ASad, gen_asad(entry.tree, entry.model_id, model_seed, opt));
    add(TaskKind::SNap, gen_snap(entry.tree, entry.model_id, model_seed, opt));
    auto [dfd, ptd] = gen_discovery(entry.tree, entry.model_id, model_seed, opt);
    out.by_task[TaskKind::SDfd].push_back(std::move(dfd));
    out.by_task[TaskKind::SPtd].push_back(std::move(ptd));
  }
  for (auto& [k, xs] : out.by_task) {
    xs = dedup(std::move(xs));
    sort_for_output(xs);
  }
  return out;
}

}  // namespace semproc
