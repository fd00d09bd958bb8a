#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "semproc/eval/metrics.hpp"
#include "semproc/eval/parse.hpp"
#include "semproc/eval/reference.hpp"
#include "semproc/instructions/compile.hpp"

namespace semproc {

struct Response {
  std::string instance_id;
  std::string raw_output;
};

inline void to_json(json& j, const Response& r) {
  j = json{{"instance_id", r.instance_id}, {"raw_output", r.raw_output}};
}
inline void from_json(const json& j, Response& r) {
  r.instance_id = j.at("instance_id").get<std::string>();
  r.raw_output = j.at("raw_output").get<std::string>();
}

class ResponseMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalOptions {
  LanguageOptions language;
};

struct TaskScore {
  TaskKind task = TaskKind::TSad;
  std::string metric;  // macro_f1 | footprint_fitness
  double value = 0;
  std::size_t n = 0;
  std::size_t parse_failures = 0;
  double parse_failure_rate = 0;
  std::size_t missing_responses = 0;
  std::map<std::string, ClassScore> per_class;
  std::vector<double> per_instance;
  std::size_t playout_overflows = 0;
};

struct EvalReport {
  std::map<TaskKind, TaskScore> tasks;
  // Inverted instances carry no classification target and are not scored.
  std::size_t unscored_inversions = 0;
  LanguageOptions language;
};

namespace detail {

inline std::string class_label(const ParsedOutput& p) {
  if (auto b = std::get_if<bool>(&p.value)) return render_bool(*b);
  if (auto a = std::get_if<Activity>(&p.value)) return a->label();
  throw std::logic_error("class_label: not a classification output");
}

inline ParsedOutput gold_of(const InstructionInstance& inst) {
  auto g = parse_output(inst.task, inst.variant, inst.output, inst.activity_set);
  if (!g.parsed()) {
    throw std::runtime_error("gold output of " + inst.instance_id + " does not parse");
  }
  return g;
}

inline bool is_classification(TaskKind t) {
  return t == TaskKind::TSad || t == TaskKind::ASad || t == TaskKind::SNap;
}

}  // namespace detail

/// Scores responses against a test split. Classification tasks use macro F1
/// over the gold labels present in the split; discovery tasks average
/// per-instance footprint fitness. A missing response is unparseable.
inline EvalReport evaluate(const std::vector<InstructionInstance>& instances,
                           const std::vector<Response>& responses, const EvalOptions& opt = {}) {
  std::map<std::string, const InstructionInstance*> by_id;
  for (const auto& i : instances) by_id[i.instance_id] = &i;
  std::map<std::string, std::string> raw;
  for (const auto& r : responses) {
    if (!by_id.contains(r.instance_id)) {
      throw ResponseMismatch("response for unknown instance " + r.instance_id);
    }
    if (!raw.emplace(r.instance_id, r.raw_output).second) {
      throw ResponseMismatch("duplicate response for instance " + r.instance_id);
    }
  }

  EvalReport report;
  report.language = opt.language;
  struct Cls {
    std::vector<std::string> golds;
    std::vector<std::optional<std::string>> preds;
  };
  std::map<TaskKind, Cls> cls;

  for (const auto& inst : instances) {
    if (inst.variant != VariantTag::Normal) {
      ++report.unscored_inversions;
      continue;
    }
    auto& score = report.tasks[inst.task];
    score.task = inst.task;
    ++score.n;
    auto it = raw.find(inst.instance_id);
    if (it == raw.end()) ++score.missing_responses;
    const ParsedOutput pred = parse_output(inst.task, inst.variant,
                                           it == raw.end() ? std::string_view{} : it->second,
                                           inst.activity_set);
    if (!pred.parsed()) ++score.parse_failures;
    const ParsedOutput gold = detail::gold_of(inst);

    if (detail::is_classification(inst.task)) {
      auto& c = cls[inst.task];
      c.golds.push_back(detail::class_label(gold));
      c.preds.push_back(pred.parsed() ? std::optional(detail::class_label(pred)) : std::nullopt);
      continue;
    }
    Dfg gold_dfg;
    if (auto d = std::get_if<Dfg>(&gold.value)) {
      gold_dfg = *d;
    } else {
      auto g = tree_dfg(std::get<ProcessTree>(gold.value), opt.language);
      if (!g) throw std::runtime_error("gold tree of " + inst.instance_id + " exceeds the playout cap");
      gold_dfg = std::move(*g);
    }
    const FitnessResult f = model_fitness(gold_dfg, inst.activity_set, std::get_if<Dfg>(&pred.value),
                                          std::get_if<ProcessTree>(&pred.value), opt.language);
    score.per_instance.push_back(f.value);
    score.playout_overflows += f.playout_overflow;
  }

  for (auto& [task, s] : report.tasks) {
    s.parse_failure_rate = s.n ? static_cast<double>(s.parse_failures) / static_cast<double>(s.n) : 0.0;
    if (detail::is_classification(task)) {
      s.metric = "macro_f1";
      const auto& c = cls[task];
      const std::set<std::string> classes(c.golds.begin(), c.golds.end());
      auto f1 = macro_f1(c.golds, c.preds, classes);
      s.value = f1.macro;
      s.per_class = std::move(f1.per_class);
    } else {
      s.metric = "footprint_fitness";
      double sum = 0;
      for (double v : s.per_instance) sum += v;
      s.value = s.per_instance.empty() ? 0.0 : sum / static_cast<double>(s.per_instance.size());
    }
  }
  return report;
}

/// Tasks whose parse-failure rate is above `threshold`.
inline std::vector<TaskKind> parse_failures_above(const EvalReport& r, double threshold) {
  std::vector<TaskKind> out;
  for (const auto& [task, s] : r.tasks) {
    if (s.parse_failure_rate > threshold) out.push_back(task);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report output

inline constexpr std::string_view kFitnessDefinition =
    "share of off-diagonal footprint cells (over the gold alphabet) with identical relation";
inline constexpr std::string_view kFitnessAggregation = "uniform mean of per-instance fitness";

inline std::vector<std::string_view> reference_models() {
  return {"Llama Base", "Llama IT", "Mistral Base", "Mistral IT", "FT RoBERTa", "FT Mistral 7B",
          "FT Llama 8B"};
}

inline json report_to_json(const EvalReport& r) {
  json tasks = json::object();
  for (const auto& [task, s] : r.tasks) {
    json per_class = json::object();
    for (const auto& [c, cs] : s.per_class) {
      per_class[c] = {{"tp", cs.tp}, {"fp", cs.fp}, {"fn", cs.fn},
                      {"precision", cs.precision}, {"recall", cs.recall}, {"f1", cs.f1}};
    }
    json refs = json::object();
    for (auto m : reference_models()) {
      if (auto v = reference_score(m, task)) refs[std::string(m)] = *v;
    }
    json t = {{"metric", s.metric},
              {"value", s.value},
              {"n", s.n},
              {"parse_failures", s.parse_failures},
              {"parse_failure_rate", s.parse_failure_rate},
              {"missing_responses", s.missing_responses},
              {"reference", refs}};
    if (!s.per_class.empty()) t["per_class"] = per_class;
    if (s.metric == "footprint_fitness") {
      t["per_instance"] = s.per_instance;
      t["playout_overflows"] = s.playout_overflows;
    }
    tasks[std::string(task_name(task))] = std::move(t);
  }
  return {{"header",
           {{"fitness_definition", kFitnessDefinition},
            {"fitness_aggregation", kFitnessAggregation},
            {"loop_redo_bound", r.language.loop_redo_bound},
            {"trace_cap", r.language.trace_cap}}},
          {"unscored_inversions", r.unscored_inversions},
          {"tasks", std::move(tasks)}};
}

inline std::string report_to_text(const EvalReport& r) {
  std::string out;
  char line[256];
  out += "fitness: " + std::string(kFitnessDefinition) + "; " + std::string(kFitnessAggregation) +
         "; loop bound " + std::to_string(r.language.loop_redo_bound) + "\n\n";
  std::snprintf(line, sizeof line, "%-6s %-18s %7s %6s %10s %9s %11s\n", "task", "metric", "score",
                "n", "parse-fail", "Llama IT", "Mistral IT");
  out += line;
  auto ref = [](std::string_view m, TaskKind t) {
    auto v = reference_score(m, t);
    char buf[16];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return std::string(buf);
  };
  for (const auto& [task, s] : r.tasks) {
    std::snprintf(line, sizeof line, "%-6s %-18s %7.4f %6zu %9.2f%% %9s %11s\n",
                  std::string(task_name(task)).c_str(), s.metric.c_str(), s.value, s.n,
                  100.0 * s.parse_failure_rate, ref("Llama IT", task).c_str(),
                  ref("Mistral IT", task).c_str());
    out += line;
  }
  return out;
}

}  // namespace semproc
