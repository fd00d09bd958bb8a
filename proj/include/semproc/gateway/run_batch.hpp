#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "semproc/gateway/backend.hpp"
#include "semproc/gateway/http_backend.hpp"
#include "semproc/util/io.hpp"

namespace semproc {

struct ResponseRecord {
  std::string instance_id;
  std::string prompt_digest;
  std::string raw_output;
  double latency_ms = 0;
  std::string backend;
  bool cached = false;
  std::string error;  // empty on success
};

inline void to_json(json& j, const ResponseRecord& r) {
  j = json{{"instance_id", r.instance_id}, {"prompt_digest", r.prompt_digest},
           {"raw_output", r.raw_output},   {"latency_ms", r.latency_ms},
           {"backend", r.backend},         {"cached", r.cached}};
  if (!r.error.empty()) j["error"] = r.error;
}

inline void from_json(const json& j, ResponseRecord& r) {
  r.instance_id = j.at("instance_id").get<std::string>();
  r.prompt_digest = j.value("prompt_digest", "");
  r.raw_output = j.at("raw_output").get<std::string>();
  r.latency_ms = j.value("latency_ms", 0.0);
  r.backend = j.value("backend", "");
  r.cached = j.value("cached", false);
  r.error = j.value("error", "");
}

struct BatchOptions {
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  int backoff_ms = 500;
};

inline BatchOptions batch_options(const BackendConfig& c) {
  return {c.max_in_flight, c.max_retries, c.backoff_ms};
}

/// `cache/<backend>/<first-2-hex>/<digest>.json`
inline fs::path cache_path(const fs::path& cache_dir, std::string_view backend, const std::string& digest) {
  return cache_dir / std::string(backend) / digest.substr(0, 2) / (digest + ".json");
}

/// Runs every instance through `backend` with at most `max_in_flight`
/// concurrent calls. Cached answers are reused; fresh ones are written to
/// the cache as soon as they arrive. Records come back in input order.
/// Throws on authentication failure, or when every attempted call found the
/// endpoint unreachable.
inline std::vector<ResponseRecord> run_batch(const std::vector<InstructionInstance>& instances,
                                             Backend& backend, const BackendConfig& config,
                                             const fs::path& cache_dir, const BatchOptions& opt) {
  std::vector<ResponseRecord> out(instances.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::atomic<std::size_t> attempted{0}, unreachable{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  const std::string bid = backend.id();

  auto work_loop = [&] {
    for (;;) {
      if (abort) return;
      const std::size_t i = next++;
      if (i >= instances.size()) return;
      const auto& inst = instances[i];
      auto& rec = out[i];
      rec.instance_id = inst.instance_id;
      rec.backend = bid;
      const std::string prompt = render_prompt(inst);
      const DecodingParams d = decoding_for(config, inst.task);
      rec.prompt_digest = prompt_digest(bid, prompt, d);
      const fs::path cp = cache_path(cache_dir, bid, rec.prompt_digest);

      if (backend.cacheable() && fs::exists(cp)) {
        try {
          const json j = json::parse(read_file(cp));
          if (j.at("prompt_digest").get<std::string>() == rec.prompt_digest) {
            rec.raw_output = j.at("raw_output").get<std::string>();
            rec.cached = true;
            continue;
          }
        } catch (const std::exception& e) {
          log_warning("ignoring unreadable cache entry " + cp.string() + ": " + e.what());
        }
      }

      ++attempted;
      bool reached = false;
      for (int attempt = 0;; ++attempt) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
          rec.raw_output = backend.complete(inst, prompt, d);
          // Offline responders report zero so their response files stay reproducible.
          if (backend.cacheable()) {
            rec.latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          }
          rec.error.clear();
          reached = true;
          if (backend.cacheable()) {
            write_file_atomic(cp, json{{"prompt_digest", rec.prompt_digest},
                                       {"backend", bid},
                                       {"decoding", d.to_json()},
                                       {"raw_output", rec.raw_output}}
                                      .dump());
          }
          break;
        } catch (const AuthError&) {
          std::lock_guard lock(fatal_mu);
          if (!fatal) fatal = std::current_exception();
          abort = true;
          return;
        } catch (const BackendError& e) {
          rec.error = e.what();
          if (!dynamic_cast<const UnreachableError*>(&e)) reached = true;
          if (!e.retryable() || attempt >= opt.max_retries || abort) break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(opt.backoff_ms << std::min(attempt, 10)));
      }
      if (!reached) ++unreachable;
      if (!rec.error.empty()) rec.raw_output.clear();
    }
  };
  auto work = [&] {
    try {
      work_loop();
    } catch (...) {
      std::lock_guard lock(fatal_mu);
      if (!fatal) fatal = std::current_exception();
      abort = true;
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opt.max_in_flight, instances.size()));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  if (fatal) std::rethrow_exception(fatal);
  if (attempted > 0 && unreachable == attempted) {
    auto failed = std::find_if(out.begin(), out.end(), [](const auto& r) { return !r.error.empty(); });
    throw UnreachableError("endpoint unreachable for all " + std::to_string(attempted.load()) +
                           " requests: " + (failed == out.end() ? std::string() : failed->error));
  }
  return out;
}

inline std::vector<ResponseRecord> run_batch(const std::vector<InstructionInstance>& instances,
                                             const BackendConfig& config, const fs::path& cache_dir) {
  auto backend = make_backend(config);
  return run_batch(instances, *backend, config, cache_dir, batch_options(config));
}

}  // namespace semproc
