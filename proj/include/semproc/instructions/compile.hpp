#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "semproc/instructions/output_format.hpp"
#include "semproc/instructions/templates.hpp"
#include "semproc/taskgen/task.hpp"
#include "semproc/util/io.hpp"
#include "semproc/util/random.hpp"

namespace semproc {

/// phi = (i, o) with i = (formulation, context).
struct InstructionInstance {
  std::string instance_id;
  TaskKind task = TaskKind::TSad;
  VariantTag variant = VariantTag::Normal;
  int template_id = 0;
  bool negative_instruction = false;
  std::string model_id;
  ActivitySet activity_set;
  std::string formulation;
  std::string context;
  std::string output;
  std::uint64_t seed = 0;

  bool operator==(const InstructionInstance&) const = default;
};

inline void to_json(json& j, const InstructionInstance& x) {
  j = json{{"instance_id", x.instance_id},
           {"task", task_name(x.task)},
           {"variant", variant_name(x.variant)},
           {"template_id", x.template_id},
           {"negative_instruction", x.negative_instruction},
           {"model_id", x.model_id},
           {"activity_set", x.activity_set},
           {"instruction", {{"formulation", x.formulation}, {"context", x.context}}},
           {"output", x.output},
           {"seed", x.seed}};
}

inline void from_json(const json& j, InstructionInstance& x) {
  x.instance_id = j.at("instance_id").get<std::string>();
  x.task = parse_task(j.at("task").get<std::string>());
  x.variant = parse_variant(j.at("variant").get<std::string>());
  x.template_id = j.at("template_id").get<int>();
  x.negative_instruction = j.value("negative_instruction", false);
  x.model_id = j.at("model_id").get<std::string>();
  x.activity_set.clear();
  for (const auto& a : j.at("activity_set")) x.activity_set.insert(a.get<Activity>());
  x.formulation = j.at("instruction").at("formulation").get<std::string>();
  x.context = j.at("instruction").at("context").get<std::string>();
  x.output = j.at("output").get<std::string>();
  x.seed = j.value("seed", std::uint64_t{0});
}

// ---------------------------------------------------------------------------
// Variant proportions

/// Percentages of normal / negative-inversion / positive-inversion instances.
struct VariantProportions {
  double normal = 100.0;
  double negative = 0.0;
  double positive = 0.0;

  double share(VariantTag v) const {
    switch (v) {
      case VariantTag::Normal: return normal;
      case VariantTag::NegativeInversion: return negative;
      case VariantTag::PositiveInversion: return positive;
    }
    return 0.0;
  }
  bool operator==(const VariantProportions&) const = default;
};

using ProportionConfig = std::map<TaskKind, VariantProportions>;

inline ProportionConfig default_proportions() {
  return {{TaskKind::ASad, {80, 10, 10}},
          {TaskKind::TSad, {80, 10, 10}},
          {TaskKind::SNap, {80, 10, 10}},
          {TaskKind::SDfd, {80, 20, 0}},
          {TaskKind::SPtd, {100, 0, 0}}};
}

class ProportionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void validate_proportions(const ProportionConfig& cfg) {
  for (auto task : kAllTasks) {
    auto it = cfg.find(task);
    if (it == cfg.end()) {
      throw ProportionError("no variant proportions for " + std::string(task_name(task)));
    }
    const auto& p = it->second;
    const std::string name(task_name(task));
    for (auto v : kAllVariants) {
      if (p.share(v) < 0) throw ProportionError(name + ": negative proportion");
      if (!variant_allowed(task, v) && p.share(v) != 0) {
        throw ProportionError(name + ": variant " + std::string(variant_name(v)) +
                              " is not available for this task");
      }
    }
    if (std::abs(p.normal + p.negative + p.positive - 100.0) > 1e-9) {
      throw ProportionError(name + ": proportions must sum to 100");
    }
  }
}

// ---------------------------------------------------------------------------
// Context rendering and inversion

inline constexpr std::string_view kActivitySetHeading = "Set of possible activities: ";

struct RenderedTask {
  std::string context;
  std::string output;
  std::map<std::string, std::string> fields;
};

inline std::string activity_set_line(const TaskInstance& t) {
  return std::string(kActivitySetHeading) + render_list(t.activity_set);
}

inline RenderedTask render_normal(const TaskInstance& t) {
  RenderedTask r;
  r.context = activity_set_line(t);
  switch (t.kind) {
    case TaskKind::TSad:
      r.context += "\nTrace: " + render_list(std::get<TracePayload>(t.payload).trace);
      r.output = render_label(std::get<AnomalyLabel>(t.gold));
      break;
    case TaskKind::ASad: {
      const auto& p = std::get<PairPayload>(t.payload);
      r.context += "\nFirst activity: " + quote_label(p.first.label()) +
                   "\nSecond activity: " + quote_label(p.second.label());
      r.output = render_label(std::get<AnomalyLabel>(t.gold));
      r.fields["act1"] = quote_label(p.first.label());
      r.fields["act2"] = quote_label(p.second.label());
      break;
    }
    case TaskKind::SNap:
      r.context += "\nSequence of activities: " + render_list(std::get<PrefixPayload>(t.payload).prefix);
      r.output = std::get<Activity>(t.gold).label();
      break;
    case TaskKind::SDfd:
      r.output = render_edges(std::get<Dfg>(t.gold).edges);
      break;
    case TaskKind::SPtd:
      r.output = serialize_tree(std::get<ProcessTree>(t.gold));
      break;
  }
  return r;
}

/// S-NAP negative instruction: one activity before the last observed one is
/// removed from the sequence, and that activity becomes the answer.
inline RenderedTask render_missing_activity(const TaskInstance& t, Rng& rng) {
  const auto& prefix = std::get<PrefixPayload>(t.payload).prefix;
  if (t.kind != TaskKind::SNap || prefix.size() < 2) {
    throw std::invalid_argument("missing-activity instruction needs an S-NAP prefix of length >= 2");
  }
  const std::size_t drop = rng.index(prefix.size() - 1);
  Trace shown = prefix;
  shown.erase(shown.begin() + static_cast<std::ptrdiff_t>(drop));
  RenderedTask r;
  r.context = activity_set_line(t) + "\nSequence of activities: " + render_list(shown);
  r.output = prefix[drop].label();
  return r;
}

class InversionUnsupported : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool inversion_eligible(const TaskInstance& t, VariantTag v) {
  if (v == VariantTag::Normal) return true;
  if (!variant_allowed(t.kind, v)) return false;
  switch (t.kind) {
    case TaskKind::TSad:
    case TaskKind::ASad: {
      const bool valid = std::get<AnomalyLabel>(t.gold) == AnomalyLabel::Valid;
      return valid == (v == VariantTag::PositiveInversion);
    }
    case TaskKind::SNap:
      return v == VariantTag::PositiveInversion ||
             !std::get<PrefixPayload>(t.payload).impossible_next.empty();
    case TaskKind::SDfd:
      return true;
    case TaskKind::SPtd:
      return false;
  }
  return false;
}

/// Renders `t` with its objective flipped to variant `v`.
inline RenderedTask render_inverted(const TaskInstance& t, VariantTag v, Rng& rng) {
  if (!inversion_eligible(t, v) || v == VariantTag::Normal) {
    throw InversionUnsupported(std::string(task_name(t.kind)) + " instance does not admit " +
                               std::string(variant_name(v)));
  }
  RenderedTask r;
  r.context = activity_set_line(t);
  switch (t.kind) {
    case TaskKind::TSad:
      r.output = render_list(std::get<TracePayload>(t.payload).trace);
      break;
    case TaskKind::ASad: {
      const auto& p = std::get<PairPayload>(t.payload);
      r.context += "\nGiven activity: " + quote_label(p.first.label());
      r.fields["activity"] = quote_label(p.first.label());
      r.output = p.second.label();
      break;
    }
    case TaskKind::SNap: {
      const auto& p = std::get<PrefixPayload>(t.payload);
      if (v == VariantTag::PositiveInversion) {
        const auto& later = std::get<Activity>(t.gold);
        r.context += "\nLater activity: " + quote_label(later.label());
        r.fields["activity"] = quote_label(later.label());
        r.output = render_list(p.prefix);
      } else {
        r.context += "\nSequence of activities: " + render_list(p.prefix);
        std::vector<Activity> wrong(p.impossible_next.begin(), p.impossible_next.end());
        r.output = wrong[rng.index(wrong.size())].label();
      }
      break;
    }
    case TaskKind::SDfd: {
      const auto& dfg = std::get<Dfg>(t.gold);
      std::set<Edge> forbidden;
      for (const auto& x : t.activity_set) {
        for (const auto& y : t.activity_set) {
          if (!dfg.has_edge(x, y)) forbidden.emplace(x, y);
        }
      }
      r.output = render_edges(forbidden);
      break;
    }
    case TaskKind::SPtd:
      break;
  }
  return r;
}

struct Inversion {
  std::string context;
  std::string output;
  VariantTag variant;
};

/// Flips the objective of `t`. Anomaly tasks invert toward their label
/// (anomalous -> negative, valid -> positive); S-NAP picks either with equal
/// probability; S-DFD only has the negative form.
inline Inversion invert(const TaskInstance& t, Rng& rng) {
  VariantTag v = VariantTag::NegativeInversion;
  switch (t.kind) {
    case TaskKind::TSad:
    case TaskKind::ASad:
      v = std::get<AnomalyLabel>(t.gold) == AnomalyLabel::Valid ? VariantTag::PositiveInversion
                                                                : VariantTag::NegativeInversion;
      break;
    case TaskKind::SNap:
      v = rng.coin() ? VariantTag::PositiveInversion : VariantTag::NegativeInversion;
      if (!inversion_eligible(t, v)) v = VariantTag::PositiveInversion;
      break;
    case TaskKind::SDfd:
      v = VariantTag::NegativeInversion;
      break;
    case TaskKind::SPtd:
      throw InversionUnsupported("S-PTD does not admit inversions");
  }
  auto r = render_inverted(t, v, rng);
  return {std::move(r.context), std::move(r.output), v};
}

// ---------------------------------------------------------------------------
// Compilation

struct CompileOptions {
  // Fraction of normal S-NAP instances (with a prefix of length >= 2) phrased
  // as a missing-activity question.
  double negative_instruction_share = 0.1;
};

namespace detail {

inline std::string instance_key(const TaskInstance& t) { return json(t).dump(); }

inline std::string format_instance_id(TaskKind task, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return std::string(task_slug(task)) + "-" + buf;
}

}  // namespace detail

/// Assigns a variant to every instance of one task. Instances are ordered by
/// a seeded hash of their content, so the assignment does not depend on input
/// order; quotas are then filled in that order from eligible instances.
inline std::vector<VariantTag> assign_variants(const std::vector<TaskInstance>& xs,
                                               const std::vector<std::uint64_t>& hashes,
                                               const std::vector<std::string>& keys,
                                               const VariantProportions& p) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(hashes[a], keys[a]) < std::tie(hashes[b], keys[b]);
  });
  std::vector<VariantTag> out(n, VariantTag::Normal);
  std::vector<bool> taken(n, false);
  for (auto v : {VariantTag::NegativeInversion, VariantTag::PositiveInversion}) {
    const auto target = static_cast<std::size_t>(std::llround(p.share(v) / 100.0 * static_cast<double>(n)));
    std::size_t filled = 0;
    for (std::size_t k = 0; k < n && filled < target; ++k) {
      const std::size_t i = order[k];
      if (taken[i] || !inversion_eligible(xs[i], v)) continue;
      taken[i] = true;
      out[i] = v;
      ++filled;
    }
    if (filled < target && !xs.empty()) {
      log_warning(std::string(task_name(xs.front().kind)) + ": only " + std::to_string(filled) +
                  " of " + std::to_string(target) + " instances eligible for " +
                  std::string(variant_name(v)));
    }
  }
  return out;
}

/// Turns task instances into instruction instances at the configured variant
/// proportions. Output is sorted by (task, model_id, content hash) and ids are
/// assigned in that order; identical (input, seed, config) give identical
/// output regardless of input order.
inline std::vector<InstructionInstance> compile(const std::vector<TaskInstance>& instances,
                                                const ProportionConfig& proportions,
                                                std::uint64_t seed, const TemplateLibrary& lib,
                                                const CompileOptions& opt = {}) {
  validate_proportions(proportions);
  std::map<TaskKind, std::vector<TaskInstance>> by_task;
  for (const auto& t : instances) by_task[t.kind].push_back(t);

  struct Staged {
    InstructionInstance inst;
    std::uint64_t hash;
    std::string key;
  };
  std::vector<Staged> staged;
  staged.reserve(instances.size());

  for (auto& [task, xs] : by_task) {
    std::vector<std::uint64_t> hashes;
    std::vector<std::string> keys;
    for (const auto& t : xs) {
      keys.push_back(detail::instance_key(t));
      hashes.push_back(derive_seed(seed, fnv1a64(keys.back())));
    }
    const auto variants = assign_variants(xs, hashes, keys, proportions.at(task));

    for (std::size_t i = 0; i < xs.size(); ++i) {
      const TaskInstance& t = xs[i];
      Rng rng(hashes[i]);
      const VariantTag v = variants[i];
      RenderedTask r;
      const Formulation* f = nullptr;
      if (v == VariantTag::Normal) {
        const bool missing_activity =
            task == TaskKind::SNap && lib.has_negative_instructions(task) &&
            std::get<PrefixPayload>(t.payload).prefix.size() >= 2 &&
            rng.unit() < opt.negative_instruction_share;
        if (missing_activity) {
          f = &select_negative_instruction(lib, task, rng);
          r = render_missing_activity(t, rng);
        } else {
          f = &select_formulation(lib, task, v, rng);
          r = render_normal(t);
        }
      } else {
        f = &select_formulation(lib, task, v, rng);
        r = render_inverted(t, v, rng);
      }
      r.fields["constraint"] = f->output_constraint;

      InstructionInstance inst;
      inst.task = task;
      inst.variant = v;
      inst.template_id = f->template_id;
      inst.negative_instruction = f->negative_instruction;
      inst.model_id = t.model_id;
      inst.activity_set = t.activity_set;
      inst.formulation = fill_placeholders(f->text, r.fields);
      inst.context = std::move(r.context);
      inst.output = std::move(r.output);
      inst.seed = seed;
      staged.push_back({std::move(inst), hashes[i], keys[i]});
    }
  }

  std::sort(staged.begin(), staged.end(), [](const Staged& a, const Staged& b) {
    return std::tie(a.inst.task, a.inst.model_id, a.hash, a.key) <
           std::tie(b.inst.task, b.inst.model_id, b.hash, b.key);
  });
  std::vector<InstructionInstance> out;
  out.reserve(staged.size());
  std::map<TaskKind, std::size_t> counters;
  for (auto& s : staged) {
    s.inst.instance_id = detail::format_instance_id(s.inst.task, counters[s.inst.task]++);
    out.push_back(std::move(s.inst));
  }
  return out;
}

}  // namespace semproc
