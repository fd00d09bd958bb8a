#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semproc/taskgen/task.hpp"
#include "semproc/util/io.hpp"
#include "semproc/util/random.hpp"

namespace semproc {

enum class VariantTag { Normal, NegativeInversion, PositiveInversion };

inline constexpr std::array<VariantTag, 3> kAllVariants = {
    VariantTag::Normal, VariantTag::NegativeInversion, VariantTag::PositiveInversion};

constexpr std::string_view variant_name(VariantTag v) {
  switch (v) {
    case VariantTag::Normal: return "normal";
    case VariantTag::NegativeInversion: return "negative_inversion";
    case VariantTag::PositiveInversion: return "positive_inversion";
  }
  return "?";
}

inline VariantTag parse_variant(std::string_view s) {
  for (auto v : kAllVariants) {
    if (s == variant_name(v)) return v;
  }
  throw std::invalid_argument("unknown variant: " + std::string(s));
}

constexpr bool variant_allowed(TaskKind task, VariantTag v) {
  switch (task) {
    case TaskKind::SPtd: return v == VariantTag::Normal;
    case TaskKind::SDfd: return v != VariantTag::PositiveInversion;
    default: return true;
  }
}

/// One task formulation: instruction text with `{placeholders}` and the
/// output constraint substituted for `{constraint}`.
struct Formulation {
  TaskKind task = TaskKind::TSad;
  VariantTag variant = VariantTag::Normal;
  int template_id = 0;
  std::string text;
  std::string output_constraint;
  // Asks about missing or undesired behavior rather than the plain task.
  bool negative_instruction = false;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingBankError : public std::runtime_error {
 public:
  MissingBankError(TaskKind task, VariantTag v)
      : std::runtime_error("no template bank for " + std::string(task_name(task)) + " / " +
                           std::string(variant_name(v))) {}
};

inline constexpr std::size_t kTemplatesPerBank = 6;

// Placeholders a template of (task, variant) may reference.
inline std::set<std::string> allowed_placeholders(TaskKind task, VariantTag v) {
  std::set<std::string> out{"constraint"};
  if (task == TaskKind::ASad && v == VariantTag::Normal) out.insert({"act1", "act2"});
  if (task == TaskKind::ASad && v != VariantTag::Normal) out.insert("activity");
  if (task == TaskKind::SNap && v == VariantTag::PositiveInversion) out.insert("activity");
  return out;
}

inline std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const auto close = text.find('}', pos);
    if (close == std::string_view::npos) break;
    out.emplace_back(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

/// Substitutes every `{name}`; throws on a name missing from `fields`.
inline std::string fill_placeholders(std::string_view text,
                                     const std::map<std::string, std::string>& fields) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('}', open);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 1, close - open - 1));
    auto it = fields.find(name);
    if (it == fields.end()) throw TemplateError("unresolved placeholder {" + name + "}");
    out += it->second;
    pos = close + 1;
  }
  out.append(text.substr(pos));
  return out;
}

struct TemplateBank {
  std::vector<Formulation> regular;
  std::vector<Formulation> negative_instruction;
};

/// Bank file format:
///
///   # comment (anywhere)
///   [<id>]                      or  [<id> negative-instruction]
///   constraint: <output constraint>
///   <instruction lines, may contain {placeholders}>
inline TemplateBank parse_bank(std::string_view text, TaskKind task, VariantTag variant,
                               const std::string& source) {
  TemplateBank bank;
  Formulation* cur = nullptr;
  std::vector<std::string> body;
  auto flush = [&] {
    if (!cur) return;
    while (!body.empty() && body.back().empty()) body.pop_back();
    std::string joined;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) joined.push_back('\n');
      joined += body[i];
    }
    cur->text = std::move(joined);
    body.clear();
  };

  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = source + ":" + std::to_string(lineno);

    if (!line.empty() && line.front() == '#') continue;
    if (!line.empty() && line.front() == '[' && line.back() == ']') {
      flush();
      std::string inner = line.substr(1, line.size() - 2);
      bool negative = false;
      if (auto sp = inner.find(' '); sp != std::string::npos) {
        if (inner.substr(sp + 1) != "negative-instruction") {
          throw TemplateError(where + ": unknown template tag");
        }
        negative = true;
        inner = inner.substr(0, sp);
      }
      Formulation f;
      f.task = task;
      f.variant = variant;
      f.negative_instruction = negative;
      try {
        f.template_id = std::stoi(inner);
      } catch (const std::exception&) {
        throw TemplateError(where + ": bad template id");
      }
      auto& dst = negative ? bank.negative_instruction : bank.regular;
      dst.push_back(std::move(f));
      cur = &dst.back();
      continue;
    }
    if (!cur) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      throw TemplateError(where + ": text before the first template header");
    }
    if (body.empty() && cur->output_constraint.empty() && line.starts_with("constraint:")) {
      std::string c = line.substr(11);
      c.erase(0, c.find_first_not_of(' '));
      cur->output_constraint = std::move(c);
      continue;
    }
    body.push_back(std::move(line));
  }
  flush();

  if (bank.regular.size() != kTemplatesPerBank) {
    throw TemplateError(source + ": expected " + std::to_string(kTemplatesPerBank) +
                        " templates, found " + std::to_string(bank.regular.size()));
  }
  const auto allowed = allowed_placeholders(task, variant);
  std::set<int> ids;
  for (const auto* list : {&bank.regular, &bank.negative_instruction}) {
    for (const auto& f : *list) {
      if (!ids.insert(f.template_id).second) {
        throw TemplateError(source + ": duplicate template id " + std::to_string(f.template_id));
      }
      if (f.output_constraint.empty() || f.text.empty()) {
        throw TemplateError(source + ": template " + std::to_string(f.template_id) +
                            " lacks text or output constraint");
      }
      for (const auto& p : placeholders_in(f.text)) {
        if (!allowed.contains(p)) {
          throw TemplateError(source + ": template " + std::to_string(f.template_id) +
                              " uses placeholder {" + p + "} not available for this task");
        }
      }
    }
  }
  for (std::size_t i = 0; i < bank.regular.size(); ++i) {
    if (bank.regular[i].template_id != static_cast<int>(i + 1)) {
      throw TemplateError(source + ": regular templates must be numbered 1.." +
                          std::to_string(kTemplatesPerBank));
    }
  }
  return bank;
}

inline std::string bank_file_name(TaskKind task, VariantTag v) {
  return std::string(task_slug(task)) + "." + std::string(variant_name(v)) + ".txt";
}

/// All template banks, one per allowed (task, variant).
class TemplateLibrary {
 public:
  static TemplateLibrary load(const fs::path& dir) {
    TemplateLibrary lib;
    for (auto task : kAllTasks) {
      for (auto v : kAllVariants) {
        if (!variant_allowed(task, v)) continue;
        const fs::path file = dir / bank_file_name(task, v);
        lib.banks_.emplace(std::make_pair(task, v),
                           parse_bank(read_file(file), task, v, file.string()));
      }
    }
    return lib;
  }

  void add(TaskKind task, VariantTag v, TemplateBank bank) {
    banks_[{task, v}] = std::move(bank);
  }

  const TemplateBank& bank(TaskKind task, VariantTag v) const {
    if (!variant_allowed(task, v)) throw MissingBankError(task, v);
    auto it = banks_.find({task, v});
    if (it == banks_.end()) throw MissingBankError(task, v);
    return it->second;
  }

  bool has_negative_instructions(TaskKind task) const {
    auto it = banks_.find({task, VariantTag::Normal});
    return it != banks_.end() && !it->second.negative_instruction.empty();
  }

 private:
  std::map<std::pair<TaskKind, VariantTag>, TemplateBank> banks_;
};

/// Uniform draw among the regular templates of the (task, variant) bank.
inline const Formulation& select_formulation(const TemplateLibrary& lib, TaskKind task,
                                             VariantTag v, Rng& rng) {
  const auto& bank = lib.bank(task, v);
  return bank.regular[rng.index(bank.regular.size())];
}

inline const Formulation& select_negative_instruction(const TemplateLibrary& lib, TaskKind task,
                                                      Rng& rng) {
  const auto& list = lib.bank(task, VariantTag::Normal).negative_instruction;
  if (list.empty()) throw MissingBankError(task, VariantTag::Normal);
  return list[rng.index(list.size())];
}

}  // namespace semproc
