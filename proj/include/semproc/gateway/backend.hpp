#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "semproc/instructions/compile.hpp"
#include "semproc/util/io.hpp"
#include "semproc/util/random.hpp"

namespace semproc {

enum class BackendKind { HttpChat, Oracle, Random };

constexpr std::string_view backend_kind_name(BackendKind k) {
  switch (k) {
    case BackendKind::HttpChat: return "http_chat";
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Random: return "random";
  }
  return "?";
}

inline BackendKind parse_backend_kind(std::string_view s) {
  for (auto k : {BackendKind::HttpChat, BackendKind::Oracle, BackendKind::Random}) {
    if (s == backend_kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown backend kind: " + std::string(s));
}

struct BackendConfig {
  std::string name;  // backend id; names the cache directory
  BackendKind kind = BackendKind::Oracle;
  std::string endpoint;  // full URL of the chat-completions route
  std::string model;
  std::string system_prompt;
  double temperature = 0.0;
  // 0 selects the per-task default.
  int max_tokens = 0;
  std::string auth_env;  // name of the environment variable holding the token
  double timeout_s = 60.0;
  int max_retries = 3;
  int backoff_ms = 500;
  std::size_t max_in_flight = 4;
  std::uint64_t seed = 0;  // random backend only
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void validate_backend(const BackendConfig& c) {
  if (c.name.empty()) throw ConfigError("backend needs a name");
  if (c.kind == BackendKind::HttpChat) {
    if (c.endpoint.empty()) throw ConfigError("backend " + c.name + ": http_chat requires an endpoint");
    if (c.model.empty()) throw ConfigError("backend " + c.name + ": http_chat requires a model");
    if (!c.endpoint.starts_with("http://") && !c.endpoint.starts_with("https://")) {
      throw ConfigError("backend " + c.name + ": endpoint must be an http(s) URL");
    }
  }
  if (c.max_in_flight == 0) throw ConfigError("backend " + c.name + ": max_in_flight must be positive");
  if (c.max_retries < 0 || c.timeout_s <= 0) throw ConfigError("backend " + c.name + ": bad retry/timeout");
}

struct DecodingParams {
  double temperature = 0.0;
  int max_tokens = 512;

  json to_json() const { return {{"temperature", temperature}, {"max_tokens", max_tokens}}; }
};

inline DecodingParams decoding_for(const BackendConfig& c, TaskKind task) {
  DecodingParams d;
  d.temperature = c.temperature;
  d.max_tokens = c.max_tokens > 0 ? c.max_tokens : group_of(task) == GroupKind::Discovery ? 2048 : 512;
  return d;
}

/// Formulation, blank line, context.
inline std::string render_prompt(const InstructionInstance& inst) {
  if (inst.formulation.empty() || inst.context.empty()) {
    throw std::invalid_argument("instance " + inst.instance_id + " has an empty formulation or context");
  }
  return inst.formulation + "\n\n" + inst.context;
}

inline std::string prompt_digest(std::string_view backend_id, std::string_view prompt,
                                 const DecodingParams& d) {
  std::string key;
  key += backend_id;
  key.push_back('\0');
  key += prompt;
  key.push_back('\0');
  key += d.to_json().dump();
  return sha256_hex(key);
}

// ---------------------------------------------------------------------------
// Errors raised by backends

class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, bool retryable) : std::runtime_error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class AuthError : public BackendError {
 public:
  explicit AuthError(const std::string& what) : BackendError(what, false) {}
};

class UnreachableError : public BackendError {
 public:
  explicit UnreachableError(const std::string& what) : BackendError(what, true) {}
};

class MalformedResponse : public BackendError {
 public:
  explicit MalformedResponse(const std::string& what) : BackendError(what, true) {}
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Offline responders answer from the instance itself and skip the cache.
  virtual bool cacheable() const { return true; }
  virtual std::string complete(const InstructionInstance& inst, const std::string& prompt,
                               const DecodingParams& decoding) = 0;
};

/// Echoes the gold output.
class OracleBackend final : public Backend {
 public:
  explicit OracleBackend(std::string id = "oracle") : id_(std::move(id)) {}
  std::string id() const override { return id_; }
  bool cacheable() const override { return false; }
  std::string complete(const InstructionInstance& inst, const std::string&, const DecodingParams&) override {
    return inst.output;
  }

 private:
  std::string id_;
};

/// Well-formed answers drawn at random, seeded by the prompt so reruns match.
class RandomBackend final : public Backend {
 public:
  explicit RandomBackend(std::uint64_t seed, std::string id = "random") : seed_(seed), id_(std::move(id)) {}
  std::string id() const override { return id_; }
  bool cacheable() const override { return false; }

  std::string complete(const InstructionInstance& inst, const std::string& prompt,
                       const DecodingParams&) override {
    Rng rng(derive_seed(seed_, fnv1a64(prompt)));
    const std::vector<Activity> acts(inst.activity_set.begin(), inst.activity_set.end());
    auto pick = [&] { return acts[rng.index(acts.size())]; };
    auto random_trace = [&] {
      std::vector<Activity> t = acts;
      rng.shuffle(t);
      t.resize(1 + rng.index(t.size()));
      return render_list(t);
    };
    if (acts.empty()) return render_bool(rng.coin());
    switch (inst.task) {
      case TaskKind::TSad:
        return inst.variant == VariantTag::Normal ? render_bool(rng.coin()) : random_trace();
      case TaskKind::ASad:
        return inst.variant == VariantTag::Normal ? render_bool(rng.coin()) : pick().label();
      case TaskKind::SNap:
        return inst.variant == VariantTag::PositiveInversion ? random_trace() : pick().label();
      case TaskKind::SDfd: {
        std::set<Edge> edges;
        for (const auto& x : acts) {
          for (const auto& y : acts) {
            if (rng.index(3) == 0) edges.emplace(x, y);
          }
        }
        return render_edges(edges);
      }
      case TaskKind::SPtd: {
        std::vector<ProcessTree> nodes;
        for (const auto& a : acts) nodes.push_back(ProcessTree::leaf(a));
        rng.shuffle(nodes);
        while (nodes.size() > 1) {
          auto b = std::move(nodes.back());
          nodes.pop_back();
          auto a = std::move(nodes.back());
          nodes.pop_back();
          static constexpr NodeKind ops[] = {NodeKind::Sequence, NodeKind::Choice, NodeKind::Parallel,
                                             NodeKind::Loop};
          nodes.push_back(ProcessTree::op(ops[rng.index(4)], {std::move(a), std::move(b)}));
          rng.shuffle(nodes);
        }
        return serialize_tree(nodes.front());
      }
    }
    return {};
  }

 private:
  std::uint64_t seed_;
  std::string id_;
};

}  // namespace semproc
