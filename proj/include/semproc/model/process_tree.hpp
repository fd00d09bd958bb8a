#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semproc/model/activity.hpp"

namespace semproc {

enum class NodeKind { Sequence, Choice, Parallel, Loop, Leaf, Tau };

/// Hierarchical control-flow model. Operator nodes own their children by
/// value; LOOP is (do-part, redo-part).
class ProcessTree {
 public:
  static ProcessTree leaf(Activity activity) {
    ProcessTree t(NodeKind::Leaf);
    t.activity_ = std::move(activity);
    return t;
  }
  static ProcessTree leaf(std::string label) { return leaf(Activity(std::move(label))); }
  static ProcessTree tau() { return ProcessTree(NodeKind::Tau); }

  static ProcessTree op(NodeKind kind, std::vector<ProcessTree> children) {
    if (kind == NodeKind::Leaf || kind == NodeKind::Tau) {
      throw std::invalid_argument("leaf kinds take no children");
    }
    if (children.empty()) {
      throw std::invalid_argument("operator node needs at least one child");
    }
    if (kind == NodeKind::Loop && children.size() != 2) {
      throw std::invalid_argument("loop node needs exactly two children");
    }
    ProcessTree t(kind);
    t.children_ = std::move(children);
    return t;
  }
  static ProcessTree seq(std::vector<ProcessTree> c) { return op(NodeKind::Sequence, std::move(c)); }
  static ProcessTree xor_(std::vector<ProcessTree> c) { return op(NodeKind::Choice, std::move(c)); }
  static ProcessTree and_(std::vector<ProcessTree> c) { return op(NodeKind::Parallel, std::move(c)); }
  static ProcessTree loop(ProcessTree body, ProcessTree redo) {
    std::vector<ProcessTree> c;
    c.push_back(std::move(body));
    c.push_back(std::move(redo));
    return op(NodeKind::Loop, std::move(c));
  }

  NodeKind kind() const { return kind_; }
  bool is_operator() const { return kind_ != NodeKind::Leaf && kind_ != NodeKind::Tau; }
  const std::vector<ProcessTree>& children() const { return children_; }
  const Activity& activity() const { return *activity_; }

  bool operator==(const ProcessTree&) const = default;

 private:
  explicit ProcessTree(NodeKind kind) : kind_(kind) {}

  NodeKind kind_;
  std::optional<Activity> activity_;
  std::vector<ProcessTree> children_;
};

inline void collect_activities(const ProcessTree& tree, ActivitySet& out) {
  if (tree.kind() == NodeKind::Leaf) {
    out.insert(tree.activity());
    return;
  }
  for (const auto& c : tree.children()) collect_activities(c, out);
}

inline ActivitySet activities_of(const ProcessTree& tree) {
  ActivitySet out;
  collect_activities(tree, out);
  return out;
}

inline std::size_t tree_depth(const ProcessTree& tree) {
  std::size_t d = 0;
  for (const auto& c : tree.children()) d = std::max(d, tree_depth(c));
  return d + 1;
}

// ---------------------------------------------------------------------------
// Text notation
//
//   tree  := leaf | op '(' tree (',' tree)* ')'
//   op    := '->' | 'X' | '+' | '*'
//   leaf  := quoted-label | 'tau'
//
// Labels are single-quoted; backslash escapes the next byte.

class TreeParseError : public std::runtime_error {
 public:
  TreeParseError(const std::string& what, std::size_t offset,
                 std::vector<std::string> expected)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class TreeSyntaxError : public TreeParseError {
 public:
  using TreeParseError::TreeParseError;
};

class TreeArityError : public TreeParseError {
 public:
  using TreeParseError::TreeParseError;
};

inline std::string quote_label(std::string_view label) {
  std::string out;
  out.reserve(label.size() + 2);
  out.push_back('\'');
  for (char c : label) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

namespace notation {

/// Byte cursor shared by the tree parser and the output parsers.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }
  bool at_end() const { return pos_ >= text_.size(); }
  std::size_t pos() const { return pos_; }
  void reset(std::size_t pos) { pos_ = pos; }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  std::string_view rest() const { return text_.substr(pos_); }

  bool consume(std::string_view token) {
    if (text_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  // Keyword match that does not accept a prefix of a longer identifier.
  bool consume_word(std::string_view word) {
    if (!text_.substr(pos_).starts_with(word)) return false;
    std::size_t end = pos_ + word.size();
    if (end < text_.size()) {
      char c = text_[end];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return false;
    }
    pos_ = end;
    return true;
  }

  // Reads a quoted label starting at the current position. Returns nullopt
  // (without moving) when no opening quote is present; throws on an
  // unterminated label.
  std::optional<std::string> quoted() {
    if (peek() != '\'') return std::nullopt;
    std::size_t start = pos_;
    ++pos_;
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) break;
        out.push_back(text_[pos_++]);
      } else if (c == '\'') {
        return out;
      } else {
        out.push_back(c);
      }
    }
    throw TreeSyntaxError("unterminated label", start, {"'"});
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace notation

namespace detail {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : cur_(text) {}

  ProcessTree parse_all() {
    ProcessTree t = parse_tree();
    cur_.skip_ws();
    if (!cur_.at_end()) fail("trailing input", {"end of input"});
    return t;
  }

  ProcessTree parse_tree() {
    cur_.skip_ws();
    const std::size_t start = cur_.pos();
    if (auto label = cur_.quoted()) {
      if (label->find_first_not_of(" \t\r\n") == std::string::npos) {
        throw TreeSyntaxError("empty activity label", start, {"non-empty label"});
      }
      return ProcessTree::leaf(Activity(std::move(*label)));
    }
    if (cur_.consume_word("tau")) return ProcessTree::tau();

    NodeKind kind;
    if (cur_.consume("->")) {
      kind = NodeKind::Sequence;
    } else if (cur_.consume_word("X")) {
      kind = NodeKind::Choice;
    } else if (cur_.consume("+")) {
      kind = NodeKind::Parallel;
    } else if (cur_.consume("*")) {
      kind = NodeKind::Loop;
    } else {
      fail(cur_.at_end() ? "unexpected end of input" : "unexpected token",
           {"'label'", "tau", "->", "X", "+", "*"});
    }

    cur_.skip_ws();
    if (!cur_.consume("(")) fail(eoi_or("expected '('"), {"("});
    std::vector<ProcessTree> children;
    children.push_back(parse_tree());
    for (;;) {
      cur_.skip_ws();
      if (cur_.consume(",")) {
        children.push_back(parse_tree());
        continue;
      }
      if (cur_.consume(")")) break;
      fail(eoi_or("expected ',' or ')'"), {",", ")"});
    }
    if (kind == NodeKind::Loop && children.size() != 2) {
      throw TreeArityError("loop operator takes exactly 2 children, got " +
                               std::to_string(children.size()),
                           start, {});
    }
    return ProcessTree::op(kind, std::move(children));
  }

 private:
  std::string eoi_or(const std::string& msg) const {
    return cur_.at_end() ? "unexpected end of input" : msg;
  }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) {
    throw TreeSyntaxError(msg, cur_.pos(), std::move(expected));
  }

  notation::Cursor cur_;
};

inline void serialize_into(const ProcessTree& tree, std::string& out) {
  switch (tree.kind()) {
    case NodeKind::Leaf:
      out += quote_label(tree.activity().label());
      return;
    case NodeKind::Tau:
      out += "tau";
      return;
    case NodeKind::Sequence: out += "->"; break;
    case NodeKind::Choice: out += "X"; break;
    case NodeKind::Parallel: out += "+"; break;
    case NodeKind::Loop: out += "*"; break;
  }
  out += "( ";
  bool first = true;
  for (const auto& c : tree.children()) {
    if (!first) out += ", ";
    first = false;
    serialize_into(c, out);
  }
  out += " )";
}

}  // namespace detail

/// Parses the text notation. Throws TreeSyntaxError / TreeArityError with the
/// byte offset of the failure.
inline ProcessTree parse_tree(std::string_view text) {
  return detail::TreeParser(text).parse_all();
}

inline std::string serialize_tree(const ProcessTree& tree) {
  std::string out;
  detail::serialize_into(tree, out);
  return out;
}

}  // namespace semproc
