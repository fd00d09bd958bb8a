#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semproc/folds/folds.hpp"
#include "semproc/gateway/backend.hpp"
#include "semproc/instructions/compile.hpp"
#include "semproc/model/language.hpp"
#include "semproc/taskgen/generate.hpp"
#include "semproc/util/io.hpp"

namespace semproc {

/// Everything a pipeline run depends on. Loaded from an INI file:
///
///   [pipeline]   corpus, output, templates, seed, loop_redo_bound, trace_cap,
///                valid_trace_cap, anomaly_attempts, parse_failure_threshold,
///                backend
///   [proportions]  <TASK> = normal/negative/positive   (percent)
///   [mixing]     default_cap, snap_discovery_cap
///   [backend:<name>]  kind, endpoint, model, system_prompt, temperature,
///                max_tokens, auth_env, timeout_s, max_retries, backoff_ms,
///                max_in_flight, seed
///
/// Relative paths resolve against the directory of the config file.
struct PipelineConfig {
  fs::path corpus;  // empty until set by the config file or --toy
  fs::path output = "out";
  fs::path templates = default_asset_dir() / "templates";
  std::uint64_t seed = 7;
  GenOptions generation;
  ProportionConfig proportions = default_proportions();
  MixingPolicy mixing;
  double parse_failure_threshold = 0.2;
  std::map<std::string, BackendConfig> backends;
  std::string backend = "oracle";

  PipelineConfig() {
    BackendConfig oracle;
    oracle.name = "oracle";
    oracle.kind = BackendKind::Oracle;
    BackendConfig random;
    random.name = "random";
    random.kind = BackendKind::Random;
    backends = {{"oracle", oracle}, {"random", random}};
  }

  const BackendConfig& backend_config(const std::string& name) const {
    auto it = backends.find(name);
    if (it == backends.end()) throw ConfigError("no backend named " + name);
    return it->second;
  }
};

namespace detail {

inline VariantProportions parse_proportion(const std::string& text, const std::string& key) {
  VariantProportions p;
  char s1 = 0, s2 = 0;
  std::istringstream in(text);
  if (!(in >> p.normal >> s1 >> p.negative >> s2 >> p.positive) || s1 != '/' || s2 != '/') {
    throw ConfigError("proportions." + key + ": expected normal/negative/positive, got '" + text + "'");
  }
  in >> std::ws;
  if (!in.eof()) throw ConfigError("proportions." + key + ": trailing text in '" + text + "'");
  return p;
}

template <typename T>
T get_or(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  if (!pt.get_child_optional(key)) return fallback;
  try {
    return pt.get<T>(key);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ConfigError("bad value for " + key + ": " + e.what());
  }
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

}  // namespace detail

inline PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  static const std::set<std::string> kSections = {"pipeline", "proportions", "mixing"};
  for (const auto& [name, _] : tree) {
    if (!kSections.contains(name) && !name.starts_with("backend:")) {
      throw ConfigError("config: unknown section [" + name + "]");
    }
  }

  PipelineConfig c;
  if (auto p = tree.get_child_optional("pipeline")) {
    static const std::set<std::string> kKeys = {
        "corpus", "output", "templates", "seed", "loop_redo_bound", "trace_cap", "valid_trace_cap",
        "anomaly_attempts", "parse_failure_threshold", "backend"};
    for (const auto& [k, _] : *p) {
      if (!kKeys.contains(k)) throw ConfigError("config: unknown key pipeline." + k);
    }
    if (auto v = p->get_optional<std::string>("corpus")) c.corpus = detail::resolve(base_dir, *v);
    if (auto v = p->get_optional<std::string>("output")) c.output = detail::resolve(base_dir, *v);
    if (auto v = p->get_optional<std::string>("templates")) c.templates = detail::resolve(base_dir, *v);
    c.seed = detail::get_or<std::uint64_t>(*p, "seed", c.seed);
    c.generation.language.loop_redo_bound =
        detail::get_or<std::size_t>(*p, "loop_redo_bound", c.generation.language.loop_redo_bound);
    c.generation.language.trace_cap = detail::get_or<std::size_t>(*p, "trace_cap", c.generation.language.trace_cap);
    c.generation.valid_trace_cap = detail::get_or<std::size_t>(*p, "valid_trace_cap", c.generation.valid_trace_cap);
    c.generation.anomaly_attempts =
        detail::get_or<std::size_t>(*p, "anomaly_attempts", c.generation.anomaly_attempts);
    c.parse_failure_threshold = detail::get_or<double>(*p, "parse_failure_threshold", c.parse_failure_threshold);
    c.backend = detail::get_or<std::string>(*p, "backend", c.backend);
  }
  if (auto p = tree.get_child_optional("proportions")) {
    for (const auto& [k, v] : *p) {
      TaskKind task;
      try {
        task = parse_task(k);
      } catch (const std::invalid_argument&) {
        throw ConfigError("config: unknown task in [proportions]: " + k);
      }
      c.proportions[task] = detail::parse_proportion(v.data(), k);
    }
  }
  if (auto p = tree.get_child_optional("mixing")) {
    c.mixing.default_cap = detail::get_or<std::size_t>(*p, "default_cap", c.mixing.default_cap);
    c.mixing.snap_discovery_cap = detail::get_or<std::size_t>(*p, "snap_discovery_cap", c.mixing.snap_discovery_cap);
  }
  for (const auto& [section, p] : tree) {
    if (!section.starts_with("backend:")) continue;
    BackendConfig b;
    b.name = section.substr(8);
    try {
      b.kind = parse_backend_kind(p.get<std::string>("kind"));
    } catch (const pt::ptree_error&) {
      throw ConfigError("config: [" + section + "] needs a kind");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: [" + section + "] " + e.what());
    }
    b.endpoint = p.get<std::string>("endpoint", "");
    b.model = p.get<std::string>("model", "");
    b.system_prompt = p.get<std::string>("system_prompt", "");
    b.temperature = detail::get_or<double>(p, "temperature", b.temperature);
    b.max_tokens = detail::get_or<int>(p, "max_tokens", b.max_tokens);
    b.auth_env = p.get<std::string>("auth_env", "");
    b.timeout_s = detail::get_or<double>(p, "timeout_s", b.timeout_s);
    b.max_retries = detail::get_or<int>(p, "max_retries", b.max_retries);
    b.backoff_ms = detail::get_or<int>(p, "backoff_ms", b.backoff_ms);
    b.max_in_flight = detail::get_or<std::size_t>(p, "max_in_flight", b.max_in_flight);
    b.seed = detail::get_or<std::uint64_t>(p, "seed", c.seed);
    c.backends[b.name] = b;
  }
  return c;
}

inline fs::path toy_corpus_path() { return default_asset_dir() / "corpus" / "toy.trees"; }

inline PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

/// Throws ConfigError on the first problem found.
inline void validate_config(const PipelineConfig& c) {
  if (c.corpus.empty()) throw ConfigError("no corpus configured (set pipeline.corpus or pass --toy)");
  if (!fs::is_regular_file(c.corpus)) throw ConfigError("corpus not found: " + c.corpus.string());
  if (!fs::is_directory(c.templates)) throw ConfigError("template directory not found: " + c.templates.string());
  if (c.output.empty()) throw ConfigError("output root is empty");
  if (c.generation.language.trace_cap == 0) throw ConfigError("trace_cap must be positive");
  if (c.mixing.default_cap == 0 || c.mixing.snap_discovery_cap == 0) {
    throw ConfigError("mixing caps must be positive");
  }
  if (c.parse_failure_threshold < 0 || c.parse_failure_threshold > 1) {
    throw ConfigError("parse_failure_threshold must lie in [0, 1]");
  }
  try {
    validate_proportions(c.proportions);
  } catch (const ProportionError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [name, b] : c.backends) validate_backend(b);
  c.backend_config(c.backend);
  try {
    TemplateLibrary::load(c.templates);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("templates: ") + e.what());
  }
}

}  // namespace semproc
