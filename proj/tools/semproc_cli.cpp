// semproc: command-line driver for the dataset and evaluation pipeline.
//
//   semproc [--config FILE] [--toy] [--seed N] [--output DIR] <subcommand>
//
// Exit codes: 0 success, 1 error, 3 parse-failure threshold exceeded.
// CLI11 uses its own codes for usage errors.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "semproc/pipeline/stages.hpp"

namespace {

using namespace semproc;

constexpr int kThresholdExceeded = 3;

struct Flags {
  std::string config;
  bool toy = false;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string held_out;
  std::string backend;
  std::optional<double> threshold;
};

PipelineConfig resolve(const Flags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_config(f.config);
  if (f.toy) c.corpus = toy_corpus_path();
  if (f.seed) c.seed = *f.seed;
  if (!f.output.empty()) c.output = f.output;
  if (!f.backend.empty()) c.backend = f.backend;
  if (f.threshold) c.parse_failure_threshold = *f.threshold;
  validate_config(c);
  return c;
}

std::optional<GroupKind> held_out(const Flags& f) {
  if (f.held_out.empty()) return std::nullopt;
  return parse_group(f.held_out);
}

void print_scores(const EvalReport& r) { std::cout << report_to_text(r); }

int cmd_gen_tasks(const PipelineConfig& c) {
  const auto r = run_gen_tasks(c);
  for (const auto& [task, n] : r.counts) std::cout << task_name(task) << ": " << n << " instances\n";
  if (r.skipped) std::cout << r.skipped << " (task, model) pairs skipped; see tasks/manifest.json\n";
  return 0;
}

int cmd_build_instructions(const PipelineConfig& c) {
  for (const auto& [task, counts] : run_build_instructions(c)) {
    std::cout << task_name(task) << ":";
    for (const auto& [v, n] : counts) std::cout << ' ' << variant_name(v) << '=' << n;
    std::cout << '\n';
  }
  return 0;
}

int cmd_make_folds(const PipelineConfig& c, const Flags& f) {
  for (const auto& fold : run_make_folds(c, held_out(f))) {
    std::cout << fold_dir_name(fold.held_out) << ": train " << fold.train.size() << ", validation "
              << fold.validation.size() << ", test " << fold.test.size() << '\n';
  }
  return 0;
}

int cmd_run_inference(const PipelineConfig& c, const Flags& f) {
  for (const auto& r : run_inference(c, c.backend, held_out(f))) {
    std::cout << fold_dir_name(r.fold) << ": " << r.responses << " responses (" << r.cached << " cached, "
              << r.errors << " failed)\n";
  }
  return 0;
}

int cmd_evaluate(const PipelineConfig& c, const Flags& f) {
  bool exceeded = false;
  for (const auto& [g, o] : run_evaluate(c, c.backend, held_out(f))) {
    std::cout << "== " << fold_dir_name(g) << '\n';
    print_scores(o.report);
    exceeded |= !o.over_threshold.empty();
  }
  return exceeded ? kThresholdExceeded : 0;
}

int cmd_report(const PipelineConfig& c) {
  const auto o = run_report(c, c.backend);
  print_scores(o.report);
  std::cout << "\nwritten to " << (Layout{c.output}.report() / (c.backend + ".txt")).string() << '\n';
  return o.over_threshold.empty() ? 0 : kThresholdExceeded;
}

int cmd_all(const PipelineConfig& c, const Flags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  cmd_gen_tasks(c);
  cmd_build_instructions(c);
  cmd_make_folds(c, f);
  cmd_run_inference(c, f);
  run_evaluate(c, c.backend, held_out(f));
  const int rc = cmd_report(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stdout, "pipeline finished in %.2f s\n", secs);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Process-mining task datasets, instruction folds and LLM evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Flags f;
  app.add_option("-c,--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_flag("--toy", f.toy, "use the bundled toy corpus");
  app.add_option("--seed", f.seed, "global seed (overrides the config)");
  app.add_option("-o,--output", f.output, "output root (overrides the config)");
  app.add_option("--backend", f.backend, "backend name from the config, or oracle/random");
  app.add_option("--held-out", f.held_out, "restrict to one fold")
      ->check(CLI::IsMember({"anomaly", "prediction", "discovery"}));
  app.add_option("--threshold", f.threshold, "parse-failure rate above which evaluate fails")
      ->check(CLI::Range(0.0, 1.0));

  auto* validate = app.add_subcommand("validate-config", "check paths, proportions, backends and templates");
  auto* gen = app.add_subcommand("gen-tasks", "generate task instances from the corpus");
  auto* build = app.add_subcommand("build-instructions", "compile task instances into instructions");
  auto* folds = app.add_subcommand("make-folds", "split models and write leave-one-group-out folds");
  auto* infer = app.add_subcommand("run-inference", "query a backend on each fold's test split");
  auto* eval = app.add_subcommand("evaluate", "score responses per fold");
  auto* report = app.add_subcommand("report", "one score table over all folds");
  auto* all = app.add_subcommand("all", "run every stage in order");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig c = resolve(f);
    if (validate->parsed()) {
      std::cout << "config ok: corpus " << c.corpus.string() << ", " << c.backends.size() << " backends, seed "
                << c.seed << '\n';
      return 0;
    }
    if (gen->parsed()) return cmd_gen_tasks(c);
    if (build->parsed()) return cmd_build_instructions(c);
    if (folds->parsed()) return cmd_make_folds(c, f);
    if (infer->parsed()) return cmd_run_inference(c, f);
    if (eval->parsed()) return cmd_evaluate(c, f);
    if (report->parsed()) return cmd_report(c);
    if (all->parsed()) return cmd_all(c, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
