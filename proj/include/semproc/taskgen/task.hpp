#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "semproc/model/activity.hpp"
#include "semproc/model/dfg.hpp"
#include "semproc/model/process_tree.hpp"

namespace semproc {

using json = nlohmann::json;

enum class TaskKind { TSad, ASad, SNap, SDfd, SPtd };

inline constexpr std::array<TaskKind, 5> kAllTasks = {
    TaskKind::TSad, TaskKind::ASad, TaskKind::SNap, TaskKind::SDfd, TaskKind::SPtd};

constexpr std::string_view task_name(TaskKind k) {
  switch (k) {
    case TaskKind::TSad: return "T-SAD";
    case TaskKind::ASad: return "A-SAD";
    case TaskKind::SNap: return "S-NAP";
    case TaskKind::SDfd: return "S-DFD";
    case TaskKind::SPtd: return "S-PTD";
  }
  return "?";
}

// Lower-case form used in file names.
constexpr std::string_view task_slug(TaskKind k) {
  switch (k) {
    case TaskKind::TSad: return "t-sad";
    case TaskKind::ASad: return "a-sad";
    case TaskKind::SNap: return "s-nap";
    case TaskKind::SDfd: return "s-dfd";
    case TaskKind::SPtd: return "s-ptd";
  }
  return "?";
}

inline TaskKind parse_task(std::string_view s) {
  for (auto k : kAllTasks) {
    if (s == task_name(k) || s == task_slug(k)) return k;
  }
  throw std::invalid_argument("unknown task: " + std::string(s));
}

enum class GroupKind { Anomaly, Prediction, Discovery };

inline constexpr std::array<GroupKind, 3> kAllGroups = {
    GroupKind::Anomaly, GroupKind::Prediction, GroupKind::Discovery};

constexpr GroupKind group_of(TaskKind k) {
  switch (k) {
    case TaskKind::TSad:
    case TaskKind::ASad: return GroupKind::Anomaly;
    case TaskKind::SNap: return GroupKind::Prediction;
    case TaskKind::SDfd:
    case TaskKind::SPtd: return GroupKind::Discovery;
  }
  return GroupKind::Anomaly;
}

constexpr std::string_view group_name(GroupKind g) {
  switch (g) {
    case GroupKind::Anomaly: return "anomaly";
    case GroupKind::Prediction: return "prediction";
    case GroupKind::Discovery: return "discovery";
  }
  return "?";
}

inline GroupKind parse_group(std::string_view s) {
  for (auto g : kAllGroups) {
    if (s == group_name(g)) return g;
  }
  throw std::invalid_argument("unknown task group: " + std::string(s));
}

inline std::vector<TaskKind> tasks_in(GroupKind g) {
  std::vector<TaskKind> out;
  for (auto k : kAllTasks) {
    if (group_of(k) == g) out.push_back(k);
  }
  return out;
}

enum class AnomalyLabel { Valid, Anomalous };

constexpr std::string_view label_name(AnomalyLabel l) {
  return l == AnomalyLabel::Valid ? "Valid" : "Anomalous";
}

// Kind-specific payloads.
struct TracePayload {
  Trace trace;
  bool operator==(const TracePayload&) const = default;
};
struct PairPayload {
  Activity first;
  Activity second;
  bool operator==(const PairPayload&) const = default;
};
struct PrefixPayload {
  Trace prefix;
  // The prefix is itself a complete trace of the source language.
  bool prefix_completes = false;
  // Activities that never directly continue this prefix in the language.
  ActivitySet impossible_next;
  bool operator==(const PrefixPayload&) const = default;
};
struct NoPayload {
  bool operator==(const NoPayload&) const = default;
};

using Payload = std::variant<TracePayload, PairPayload, PrefixPayload, NoPayload>;
using Gold = std::variant<AnomalyLabel, Activity, Dfg, ProcessTree>;

/// One labeled instance of one task, derived from one source model.
struct TaskInstance {
  TaskKind kind = TaskKind::TSad;
  std::string model_id;
  ActivitySet activity_set;
  Payload payload = NoPayload{};
  Gold gold = AnomalyLabel::Valid;
  std::uint64_t seed = 0;

  bool operator==(const TaskInstance&) const = default;
};

// ---------------------------------------------------------------------------
// JSON

inline json dfg_to_json(const Dfg& dfg) {
  json edges = json::array();
  for (const auto& [x, y] : dfg.edges) edges.push_back(json::array({x.label(), y.label()}));
  return json{{"nodes", dfg.nodes}, {"edges", std::move(edges)}};
}

inline Dfg dfg_from_json(const json& j) {
  Dfg dfg;
  for (const auto& n : j.at("nodes")) dfg.nodes.insert(n.get<Activity>());
  for (const auto& e : j.at("edges")) {
    dfg.add_edge(e.at(0).get<Activity>(), e.at(1).get<Activity>());
  }
  return dfg;
}

inline json payload_to_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TracePayload>) {
          return json{{"trace", v.trace}};
        } else if constexpr (std::is_same_v<T, PairPayload>) {
          return json{{"pair", json::array({v.first, v.second})}};
        } else if constexpr (std::is_same_v<T, PrefixPayload>) {
          return json{{"prefix", v.prefix},
                      {"prefix_completes", v.prefix_completes},
                      {"impossible_next", v.impossible_next}};
        } else {
          return json::object();
        }
      },
      p);
}

inline json gold_to_json(const Gold& g) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AnomalyLabel>) {
          return std::string(label_name(v));
        } else if constexpr (std::is_same_v<T, Activity>) {
          return v.label();
        } else if constexpr (std::is_same_v<T, Dfg>) {
          return dfg_to_json(v);
        } else {
          return serialize_tree(v);
        }
      },
      g);
}

inline json to_json_value(const TaskInstance& t) {
  return json{{"kind", task_name(t.kind)},
              {"model_id", t.model_id},
              {"activity_set", t.activity_set},
              {"payload", payload_to_json(t.payload)},
              {"gold", gold_to_json(t.gold)},
              {"seed", t.seed}};
}

inline void to_json(json& j, const TaskInstance& t) { j = to_json_value(t); }

inline TaskInstance task_instance_from_json(const json& j) {
  TaskInstance t;
  t.kind = parse_task(j.at("kind").get<std::string>());
  t.model_id = j.at("model_id").get<std::string>();
  for (const auto& a : j.at("activity_set")) t.activity_set.insert(a.get<Activity>());
  t.seed = j.value("seed", std::uint64_t{0});
  const json& p = j.at("payload");
  const json& g = j.at("gold");
  switch (t.kind) {
    case TaskKind::TSad:
      t.payload = TracePayload{p.at("trace").get<Trace>()};
      t.gold = g.get<std::string>() == "Valid" ? AnomalyLabel::Valid : AnomalyLabel::Anomalous;
      break;
    case TaskKind::ASad:
      t.payload = PairPayload{p.at("pair").at(0).get<Activity>(), p.at("pair").at(1).get<Activity>()};
      t.gold = g.get<std::string>() == "Valid" ? AnomalyLabel::Valid : AnomalyLabel::Anomalous;
      break;
    case TaskKind::SNap: {
      PrefixPayload pp;
      pp.prefix = p.at("prefix").get<Trace>();
      pp.prefix_completes = p.value("prefix_completes", false);
      if (p.contains("impossible_next")) {
        for (const auto& a : p.at("impossible_next")) pp.impossible_next.insert(a.get<Activity>());
      }
      t.payload = std::move(pp);
      t.gold = g.get<Activity>();
      break;
    }
    case TaskKind::SDfd:
      t.payload = NoPayload{};
      t.gold = dfg_from_json(g);
      break;
    case TaskKind::SPtd:
      t.payload = NoPayload{};
      t.gold = parse_tree(g.get<std::string>());
      break;
  }
  return t;
}

}  // namespace semproc
