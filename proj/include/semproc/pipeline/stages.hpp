#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semproc/eval/evaluate.hpp"
#include "semproc/folds/folds.hpp"
#include "semproc/gateway/run_batch.hpp"
#include "semproc/instructions/compile.hpp"
#include "semproc/pipeline/config.hpp"
#include "semproc/taskgen/generate.hpp"

#ifndef SEMPROC_VERSION
#define SEMPROC_VERSION "dev"
#endif

namespace semproc {

inline constexpr std::string_view kToolVersion = SEMPROC_VERSION;

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output layout under the configured root:
//
//   tasks/<task>.jsonl              tasks/manifest.json
//   instructions/<task>.jsonl       instructions/manifest.json
//   folds/splits.json               folds/fold-<group>/{train,validation,test}.jsonl, manifest.json
//   inference/<backend>/fold-<group>.jsonl + .manifest.json
//   eval/<backend>/fold-<group>.{json,txt}
//   report/<backend>.{json,txt}
//
// Manifests key files by their path relative to the root, so two runs into
// different roots are byte-identical.
struct Layout {
  fs::path root;

  fs::path tasks() const { return root / "tasks"; }
  fs::path instructions() const { return root / "instructions"; }
  fs::path folds() const { return root / "folds"; }
  fs::path fold(GroupKind g) const { return folds() / fold_dir_name(g); }
  fs::path inference(const std::string& backend) const { return root / "inference" / backend; }
  fs::path eval(const std::string& backend) const { return root / "eval" / backend; }
  fs::path report() const { return root / "report"; }
  fs::path cache() const { return root / "cache"; }

  std::string rel(const fs::path& p) const { return fs::relative(p, root).generic_string(); }
};

namespace detail {

class Manifest {
 public:
  Manifest(const Layout& layout, std::string stage, std::uint64_t seed) : layout_(layout) {
    j_ = {{"stage", std::move(stage)}, {"version", kToolVersion}, {"seed", seed},
          {"inputs", json::object()}, {"outputs", json::object()}};
  }

  // External inputs (corpus, templates) are keyed by a logical name.
  void external_input(const std::string& name, const fs::path& p) { j_["inputs"][name] = file_digest(p); }
  void input(const fs::path& p) { j_["inputs"][layout_.rel(p)] = file_digest(p); }
  void output(const fs::path& p, std::string_view content) {
    write_file_atomic(p, content);
    j_["outputs"][layout_.rel(p)] = sha256_hex(content);
  }
  json& operator[](const std::string& k) { return j_[k]; }
  void write(const fs::path& p) const { write_file_atomic(p, j_.dump(2) + "\n"); }

 private:
  const Layout& layout_;
  json j_;
};

/// Reads an upstream manifest and warns about every recorded output whose
/// current digest differs. Throws if the manifest is missing.
inline json check_upstream(const Layout& layout, const fs::path& manifest_path, std::string_view producer) {
  if (!fs::exists(manifest_path)) {
    throw MissingInput("missing " + manifest_path.string() + "; run " + std::string(producer) + " first");
  }
  const json m = json::parse(read_file(manifest_path));
  const json outputs = m.value("outputs", json::object());
  for (const auto& [rel, digest] : outputs.items()) {
    const fs::path p = layout.root / rel;
    if (!fs::exists(p)) {
      log_warning("stale input: " + rel + " listed by " + layout.rel(manifest_path) + " is missing");
    } else if (file_digest(p) != digest.get<std::string>()) {
      log_warning("stale input: " + rel + " changed since " + std::string(producer) + " wrote it");
    }
  }
  return m;
}

inline void require_file(const fs::path& p, std::string_view producer) {
  if (!fs::exists(p)) throw MissingInput("missing " + p.string() + "; run " + std::string(producer) + " first");
}

inline json options_json(const PipelineConfig& c) {
  return {{"loop_redo_bound", c.generation.language.loop_redo_bound},
          {"trace_cap", c.generation.language.trace_cap},
          {"valid_trace_cap", c.generation.valid_trace_cap},
          {"anomaly_attempts", c.generation.anomaly_attempts}};
}

template <typename T>
std::vector<T> read_rows(const fs::path& p) {
  std::vector<T> out;
  for (const auto& j : read_jsonl(p)) out.push_back(j.get<T>());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gen-tasks

struct GenTasksResult {
  std::map<TaskKind, std::size_t> counts;
  std::size_t skipped = 0;
};

inline GenTasksResult run_gen_tasks(const PipelineConfig& c) {
  const Layout L{c.output};
  const auto corpus = read_corpus(c.corpus);
  const auto data = generate_corpus(corpus, c.seed, c.generation);

  detail::Manifest m(L, "gen-tasks", c.seed);
  m.external_input("corpus", c.corpus);
  m["options"] = detail::options_json(c);
  m["models"] = corpus.size();
  GenTasksResult res;
  json counts = json::object();
  for (const auto& [task, xs] : data.by_task) {
    std::string rows;
    for (const auto& t : xs) rows += to_json_value(t).dump() + "\n";
    m.output(L.tasks() / (std::string(task_slug(task)) + ".jsonl"), rows);
    counts[std::string(task_name(task))] = xs.size();
    res.counts[task] = xs.size();
  }
  json skipped = json::array();
  for (const auto& [task, model, why] : data.skipped) {
    skipped.push_back({{"task", task_name(task)}, {"model_id", model}, {"reason", why}});
  }
  res.skipped = skipped.size();
  m["counts"] = counts;
  m["skipped"] = skipped;
  m.write(L.tasks() / "manifest.json");
  return res;
}

// ---------------------------------------------------------------------------
// build-instructions

inline std::map<TaskKind, std::map<VariantTag, std::size_t>> run_build_instructions(const PipelineConfig& c) {
  const Layout L{c.output};
  detail::check_upstream(L, L.tasks() / "manifest.json", "gen-tasks");
  const auto lib = TemplateLibrary::load(c.templates);

  detail::Manifest m(L, "build-instructions", c.seed);
  std::vector<TaskInstance> tasks;
  for (auto t : kAllTasks) {
    const fs::path p = L.tasks() / (std::string(task_slug(t)) + ".jsonl");
    detail::require_file(p, "gen-tasks");
    m.input(p);
    for (const auto& j : read_jsonl(p)) tasks.push_back(task_instance_from_json(j));
  }
  std::vector<fs::path> template_files;
  for (const auto& e : fs::directory_iterator(c.templates)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") template_files.push_back(e.path());
  }
  std::sort(template_files.begin(), template_files.end());
  for (const auto& p : template_files) m.external_input("templates/" + p.filename().string(), p);

  const auto compiled = compile(tasks, c.proportions, c.seed, lib);
  std::map<TaskKind, std::vector<InstructionInstance>> by_task;
  for (auto t : kAllTasks) by_task[t];
  std::map<TaskKind, std::map<VariantTag, std::size_t>> counts;
  for (const auto& x : compiled) {
    by_task[x.task].push_back(x);
    ++counts[x.task][x.variant];
  }
  json proportions = json::object(), variants = json::object();
  for (const auto& [task, xs] : by_task) {
    m.output(L.instructions() / (std::string(task_slug(task)) + ".jsonl"), to_jsonl(xs));
    const auto& p = c.proportions.at(task);
    proportions[std::string(task_name(task))] = {p.normal, p.negative, p.positive};
    json v = json::object();
    for (auto tag : kAllVariants) v[std::string(variant_name(tag))] = counts[task][tag];
    variants[std::string(task_name(task))] = v;
  }
  m["proportions"] = proportions;
  m["variant_counts"] = variants;
  m.write(L.instructions() / "manifest.json");
  return counts;
}

// ---------------------------------------------------------------------------
// make-folds

inline std::vector<InstructionInstance> read_instructions(const Layout& L) {
  std::vector<InstructionInstance> xs;
  for (auto t : kAllTasks) {
    const fs::path p = L.instructions() / (std::string(task_slug(t)) + ".jsonl");
    detail::require_file(p, "build-instructions");
    auto rows = detail::read_rows<InstructionInstance>(p);
    xs.insert(xs.end(), rows.begin(), rows.end());
  }
  return xs;
}

/// Splits models once across all tasks and writes one fold per held-out
/// group (or only `only`, when given).
inline std::vector<Fold> run_make_folds(const PipelineConfig& c, std::optional<GroupKind> only = {}) {
  const Layout L{c.output};
  detail::check_upstream(L, L.instructions() / "manifest.json", "build-instructions");

  const auto xs = read_instructions(L);
  std::set<std::string> models;
  for (const auto& x : xs) models.insert(x.model_id);
  const auto splits = split_models(models, c.seed);

  json assignment = json::object();
  for (const auto& [model, s] : splits) assignment[model] = split_name(s);
  const fs::path splits_file = L.folds() / "splits.json";
  write_file_atomic(splits_file, json{{"seed", c.seed}, {"models", assignment}}.dump(2) + "\n");

  std::vector<Fold> out;
  for (auto g : kAllGroups) {
    if (only && *only != g) continue;
    Fold fold = build_fold(g, xs, splits, c.mixing, c.seed);
    detail::Manifest m(L, "make-folds", c.seed);
    for (auto t : kAllTasks) m.input(L.instructions() / (std::string(task_slug(t)) + ".jsonl"));
    m.input(splits_file);
    const fs::path dir = L.fold(g);
    m.output(dir / "train.jsonl", to_jsonl(fold.train));
    m.output(dir / "validation.jsonl", to_jsonl(fold.validation));
    m.output(dir / "test.jsonl", to_jsonl(fold.test));
    for (const auto& [k, v] : fold.manifest.items()) m[k] = v;
    m.write(dir / "manifest.json");
    out.push_back(std::move(fold));
  }
  return out;
}

/// Model ids per split, read back from a written fold.
struct FoldModels {
  std::set<std::string> train, validation, test;
};

inline FoldModels fold_models(const fs::path& dir) {
  FoldModels out;
  auto collect = [&](const char* file, std::set<std::string>& dst) {
    for (const auto& j : read_jsonl(dir / file)) dst.insert(j.at("model_id").get<std::string>());
  };
  collect("train.jsonl", out.train);
  collect("validation.jsonl", out.validation);
  collect("test.jsonl", out.test);
  return out;
}

// ---------------------------------------------------------------------------
// run-inference

inline std::vector<GroupKind> folds_present(const Layout& L, std::optional<GroupKind> only) {
  std::vector<GroupKind> out;
  for (auto g : kAllGroups) {
    if (only && *only != g) continue;
    if (fs::exists(L.fold(g) / "manifest.json")) out.push_back(g);
  }
  if (only && out.empty()) {
    throw MissingInput("missing " + L.fold(*only).string() + "; run make-folds first");
  }
  if (out.empty()) throw MissingInput("no folds under " + L.folds().string() + "; run make-folds first");
  return out;
}

struct InferenceResult {
  GroupKind fold;
  std::size_t responses = 0, cached = 0, errors = 0;
};

inline std::vector<InferenceResult> run_inference(const PipelineConfig& c, const std::string& backend_name,
                                                  std::optional<GroupKind> only = {}) {
  const Layout L{c.output};
  const BackendConfig& bc = c.backend_config(backend_name);
  auto backend = make_backend(bc);
  std::vector<InferenceResult> out;
  for (auto g : folds_present(L, only)) {
    detail::check_upstream(L, L.fold(g) / "manifest.json", "make-folds");
    const fs::path test = L.fold(g) / "test.jsonl";
    detail::require_file(test, "make-folds");
    const auto xs = detail::read_rows<InstructionInstance>(test);
    const auto records = run_batch(xs, *backend, bc, L.cache(), batch_options(bc));

    detail::Manifest m(L, "run-inference", c.seed);
    m.input(test);
    m["backend"] = {{"name", bc.name}, {"kind", backend_kind_name(bc.kind)}, {"model", bc.model},
                    {"temperature", bc.temperature}, {"max_tokens", bc.max_tokens}};
    InferenceResult r{g};
    for (const auto& rec : records) {
      ++r.responses;
      r.cached += rec.cached;
      r.errors += !rec.error.empty();
    }
    m["responses"] = r.responses;
    m["cached"] = r.cached;
    m["errors"] = r.errors;
    const fs::path dir = L.inference(bc.name);
    m.output(dir / (fold_dir_name(g) + ".jsonl"), to_jsonl(records));
    m.write(dir / (fold_dir_name(g) + ".manifest.json"));
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// evaluate / report

struct EvalOutcome {
  EvalReport report;
  std::vector<TaskKind> over_threshold;
};

namespace detail {

inline EvalReport evaluate_fold(const Layout& L, const PipelineConfig& c, const std::string& backend,
                                GroupKind g, Manifest* m) {
  const fs::path test = L.fold(g) / "test.jsonl";
  const fs::path resp = L.inference(backend) / (fold_dir_name(g) + ".jsonl");
  require_file(test, "make-folds");
  check_upstream(L, L.inference(backend) / (fold_dir_name(g) + ".manifest.json"), "run-inference");
  if (m) {
    m->input(test);
    m->input(resp);
  }
  return evaluate(read_rows<InstructionInstance>(test), read_rows<Response>(resp), {c.generation.language});
}

inline void warn_threshold(const EvalOutcome& o, double threshold) {
  for (auto t : o.over_threshold) {
    log_warning(std::string(task_name(t)) + " parse-failure rate " +
                std::to_string(o.report.tasks.at(t).parse_failure_rate) + " exceeds threshold " +
                std::to_string(threshold));
  }
}

}  // namespace detail

/// Scores each fold's test split separately.
inline std::vector<std::pair<GroupKind, EvalOutcome>> run_evaluate(const PipelineConfig& c,
                                                                   const std::string& backend,
                                                                   std::optional<GroupKind> only = {}) {
  const Layout L{c.output};
  std::vector<std::pair<GroupKind, EvalOutcome>> out;
  for (auto g : folds_present(L, only)) {
    detail::Manifest m(L, "evaluate", c.seed);
    EvalOutcome o;
    o.report = detail::evaluate_fold(L, c, backend, g, &m);
    o.over_threshold = parse_failures_above(o.report, c.parse_failure_threshold);
    detail::warn_threshold(o, c.parse_failure_threshold);
    json j = report_to_json(o.report);
    j["held_out"] = group_name(g);
    j["backend"] = backend;
    j["parse_failure_threshold"] = c.parse_failure_threshold;
    const fs::path dir = L.eval(backend);
    m.output(dir / (fold_dir_name(g) + ".json"), j.dump(2) + "\n");
    m.output(dir / (fold_dir_name(g) + ".txt"), report_to_text(o.report));
    m.write(dir / (fold_dir_name(g) + ".manifest.json"));
    out.emplace_back(g, std::move(o));
  }
  return out;
}

/// One table over all folds: each task is scored on the fold that holds out
/// its group.
inline EvalOutcome run_report(const PipelineConfig& c, const std::string& backend) {
  const Layout L{c.output};
  detail::Manifest m(L, "report", c.seed);
  EvalOutcome o;
  o.report.language = c.generation.language;
  json folds = json::array();
  for (auto g : folds_present(L, std::nullopt)) {
    auto r = detail::evaluate_fold(L, c, backend, g, &m);
    for (auto& [task, s] : r.tasks) o.report.tasks[task] = std::move(s);
    o.report.unscored_inversions += r.unscored_inversions;
    folds.push_back(group_name(g));
  }
  o.over_threshold = parse_failures_above(o.report, c.parse_failure_threshold);
  detail::warn_threshold(o, c.parse_failure_threshold);
  json j = report_to_json(o.report);
  j["backend"] = backend;
  j["folds"] = folds;
  j["parse_failure_threshold"] = c.parse_failure_threshold;
  m.output(L.report() / (backend + ".json"), j.dump(2) + "\n");
  m.output(L.report() / (backend + ".txt"), report_to_text(o.report));
  m.write(L.report() / (backend + ".manifest.json"));
  return o;
}

}  // namespace semproc
