#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "semproc/taskgen/task.hpp"

namespace semproc {

struct ReferenceScore {
  std::string_view model;
  TaskKind task;
  double value;
};

// Published results, kept for side-by-side display only. Instruction-tuned
// 70B+ models and their base versions, then task-specific fine-tuned models.
inline constexpr std::array<ReferenceScore, 20> kInstructionTunedReference = {{
    {"Llama Base", TaskKind::ASad, 0.594},   {"Llama IT", TaskKind::ASad, 0.562},
    {"Mistral Base", TaskKind::ASad, 0.421}, {"Mistral IT", TaskKind::ASad, 0.679},
    {"Llama Base", TaskKind::TSad, 0.558},   {"Llama IT", TaskKind::TSad, 0.480},
    {"Mistral Base", TaskKind::TSad, 0.347}, {"Mistral IT", TaskKind::TSad, 0.620},
    {"Llama Base", TaskKind::SNap, 0.525},   {"Llama IT", TaskKind::SNap, 0.651},
    {"Mistral Base", TaskKind::SNap, 0.624}, {"Mistral IT", TaskKind::SNap, 0.868},
    {"Llama Base", TaskKind::SDfd, 0.630},   {"Llama IT", TaskKind::SDfd, 0.714},
    {"Mistral Base", TaskKind::SDfd, 0.658}, {"Mistral IT", TaskKind::SDfd, 0.770},
    {"Llama Base", TaskKind::SPtd, 0.621},   {"Llama IT", TaskKind::SPtd, 0.697},
    {"Mistral Base", TaskKind::SPtd, 0.649}, {"Mistral IT", TaskKind::SPtd, 0.763},
}};

inline constexpr std::array<ReferenceScore, 13> kFineTunedReference = {{
    {"FT RoBERTa", TaskKind::TSad, 0.77},   {"FT Mistral 7B", TaskKind::TSad, 0.79},
    {"FT Llama 8B", TaskKind::TSad, 0.79},  {"FT RoBERTa", TaskKind::ASad, 0.85},
    {"FT Mistral 7B", TaskKind::ASad, 0.88}, {"FT Llama 8B", TaskKind::ASad, 0.88},
    {"FT RoBERTa", TaskKind::SNap, 0.63},   {"FT Mistral 7B", TaskKind::SNap, 0.68},
    {"FT Llama 8B", TaskKind::SNap, 0.69},  {"FT Mistral 7B", TaskKind::SDfd, 0.81},
    {"FT Llama 8B", TaskKind::SDfd, 0.80},  {"FT Mistral 7B", TaskKind::SPtd, 0.84},
    {"FT Llama 8B", TaskKind::SPtd, 0.83},
}};

inline std::optional<double> reference_score(std::string_view model, TaskKind task) {
  for (const auto& r : kInstructionTunedReference) {
    if (r.model == model && r.task == task) return r.value;
  }
  for (const auto& r : kFineTunedReference) {
    if (r.model == model && r.task == task) return r.value;
  }
  return std::nullopt;
}

}  // namespace semproc
