#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "semproc/model/dfg.hpp"
#include "semproc/model/footprint.hpp"
#include "semproc/model/language.hpp"
#include "semproc/model/process_tree.hpp"
#include "support/oracles.hpp"

namespace semproc {
namespace {

constexpr const char* kPoTree =
    "->( 'create PO', X( 'reject PO', ->( 'approve PO', 'create invoice' ) ) )";

std::set<Trace> as_set(const EventLog& log) {
  return {log.traces.begin(), log.traces.end()};
}

TEST(ParseTree, PurchaseOrderExample) {
  ProcessTree t = parse_tree(kPoTree);
  ASSERT_EQ(t.kind(), NodeKind::Sequence);
  ASSERT_EQ(t.children().size(), 2u);
  EXPECT_EQ(t.children()[0].activity().label(), "create PO");
  const auto& choice = t.children()[1];
  ASSERT_EQ(choice.kind(), NodeKind::Choice);
  EXPECT_EQ(choice.children()[1].kind(), NodeKind::Sequence);
  EXPECT_EQ(serialize_tree(t), kPoTree);
}

TEST(ParseTree, SingleLeafAndTau) {
  EXPECT_EQ(parse_tree("'a'"), ProcessTree::leaf("a"));
  EXPECT_EQ(parse_tree("  tau "), ProcessTree::tau());
  EXPECT_EQ(serialize_tree(ProcessTree::leaf("a")), "'a'");
  EXPECT_EQ(serialize_tree(ProcessTree::tau()), "tau");
}

TEST(ParseTree, CompactSpacingAccepted) {
  EXPECT_EQ(serialize_tree(parse_tree("*('a',+('b',tau))")), "*( 'a', +( 'b', tau ) )");
}

TEST(ParseTree, EscapedLabels) {
  ProcessTree t = parse_tree(R"(X( 'it\'s', 'back\\slash' ))");
  EXPECT_EQ(t.children()[0].activity().label(), "it's");
  EXPECT_EQ(t.children()[1].activity().label(), "back\\slash");
  EXPECT_EQ(parse_tree(serialize_tree(t)), t);
}

TEST(ParseTree, UnbalancedReportsEndOfInput) {
  const std::string text = "->( 'a',";
  try {
    parse_tree(text);
    FAIL() << "expected a syntax error";
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), text.size());
    EXPECT_NE(std::string(e.what()).find("end of input"), std::string::npos);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(ParseTree, MissingCloseParen) {
  try {
    parse_tree("->( 'a' 'b' )");
    FAIL();
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), 8u);
    EXPECT_EQ(e.expected(), (std::vector<std::string>{",", ")"}));
  }
}

TEST(ParseTree, Errors) {
  EXPECT_THROW(parse_tree("*( 'a' )"), TreeArityError);
  EXPECT_THROW(parse_tree("*( 'a', 'b', 'c' )"), TreeArityError);
  EXPECT_THROW(parse_tree("'a' 'b'"), TreeSyntaxError);
  EXPECT_THROW(parse_tree("''"), TreeSyntaxError);
  EXPECT_THROW(parse_tree("'unterminated"), TreeSyntaxError);
  EXPECT_THROW(parse_tree("->()"), TreeSyntaxError);
  EXPECT_THROW(parse_tree("Xa( 'a' )"), TreeSyntaxError);
  EXPECT_THROW(parse_tree("taux"), TreeSyntaxError);
  EXPECT_THROW(parse_tree(""), TreeSyntaxError);
}

TEST(ParseTree, RoundTripRandomTrees) {
  oracle::TreeGenerator gen(11, 5, 10);
  for (int i = 0; i < 300; ++i) {
    ProcessTree t = gen.next();
    EXPECT_EQ(parse_tree(serialize_tree(t)), t) << serialize_tree(t);
  }
}

TEST(EnumerateLanguage, SequenceOfChoice) {
  auto log = enumerate_language(parse_tree("->( 'a', X( 'b', 'c' ) )"));
  EXPECT_EQ(log.traces, (std::vector<Trace>{make_trace({"a", "b"}), make_trace({"a", "c"})}));
  EXPECT_EQ(log.alphabet.size(), 3u);
}

TEST(EnumerateLanguage, TauIsEmptyTrace) {
  auto log = enumerate_language(ProcessTree::tau());
  ASSERT_EQ(log.traces.size(), 1u);
  EXPECT_TRUE(log.traces[0].empty());
  EXPECT_TRUE(log.alphabet.empty());
}

TEST(EnumerateLanguage, LoopBoundOneMatchesUnrollingOracle) {
  ProcessTree t = parse_tree("*( 'a', 'b' )");
  auto expected = oracle::naive_language(t, 1);
  ASSERT_EQ(expected, (std::set<Trace>{make_trace({"a"}), make_trace({"a", "b", "a"})}));
  EXPECT_EQ(as_set(enumerate_language(t, {.loop_redo_bound = 1})), expected);
}

TEST(EnumerateLanguage, LoopBoundZeroIsBodyOnly) {
  auto log = enumerate_language(parse_tree("*( 'a', 'b' )"), {.loop_redo_bound = 0});
  EXPECT_EQ(log.traces, std::vector<Trace>{make_trace({"a"})});
}

TEST(EnumerateLanguage, ParallelInterleavings) {
  auto log = enumerate_language(parse_tree("+( 'a', ->( 'b', 'c' ) )"));
  EXPECT_EQ(log.traces.size(), 3u);
  EXPECT_TRUE(std::is_sorted(log.traces.begin(), log.traces.end()));
}

TEST(EnumerateLanguage, CapThrows) {
  ProcessTree wide = parse_tree("+( 'a', 'b', 'c', 'd', 'e' )");  // 120 traces
  EXPECT_NO_THROW(enumerate_language(wide, {.trace_cap = 120}));
  EXPECT_THROW(enumerate_language(wide, {.trace_cap = 119}), LanguageTooLarge);
}

TEST(EnumerateLanguage, AgreesWithNaiveOracleAndAcceptor) {
  oracle::TreeGenerator gen(3);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    ProcessTree t = gen.next();
    EventLog log;
    try {
      log = enumerate_language(t, {.loop_redo_bound = 2, .trace_cap = 2000});
    } catch (const LanguageTooLarge&) {
      continue;
    }
    ++checked;
    EXPECT_EQ(as_set(log), oracle::naive_language(t, 2)) << serialize_tree(t);
    oracle::Acceptor acc(t, 2);
    for (const auto& trace : log.traces) EXPECT_TRUE(acc.accepts(trace));
  }
  EXPECT_GT(checked, 100);
}

TEST(EfPairs, Definition) {
  auto p = ef_pairs(make_trace({"a", "b", "c"}));
  EXPECT_EQ(p, (std::set<EfPair>{{Activity("a"), Activity("b")},
                                 {Activity("a"), Activity("c")},
                                 {Activity("b"), Activity("c")}}));
  EXPECT_TRUE(ef_pairs(make_trace({"a"})).empty());
  auto app = ef_pairs(make_trace({"register application", "approve application"}));
  EXPECT_TRUE(app.contains({Activity("register application"), Activity("approve application")}));
}

TEST(EfPairs, ContainsAdjacentAndBoundedSize) {
  oracle::TreeGenerator gen(5);
  for (int i = 0; i < 50; ++i) {
    EventLog log;
    try {
      log = enumerate_language(gen.next(), {.trace_cap = 500});
    } catch (const LanguageTooLarge&) {
      continue;
    }
    for (const auto& t : log.traces) {
      auto pairs = ef_pairs(t);
      for (std::size_t k = 1; k < t.size(); ++k) EXPECT_TRUE(pairs.contains({t[k - 1], t[k]}));
      const std::size_t n = t.size();
      if (alphabet_of(t).size() == n) {
        EXPECT_LE(pairs.size(), n * (n - 1) / 2);
      }
    }
  }
}

TEST(DfgOfLog, Basics) {
  auto d1 = dfg_of_log(EventLog::from_traces({make_trace({"a", "b"})}));
  EXPECT_EQ(d1.edges, (std::set<Edge>{{Activity("a"), Activity("b")}}));
  auto d2 = dfg_of_log(EventLog::from_traces({make_trace({"a", "b"}), make_trace({"b", "a"})}));
  EXPECT_EQ(d2.edges.size(), 2u);
  EXPECT_TRUE(d2.has_edge(Activity("b"), Activity("a")));
}

TEST(DfgOfLog, PurchaseOrderLanguage) {
  Dfg d = dfg_of_log(enumerate_language(parse_tree(kPoTree)));
  EXPECT_TRUE(d.has_edge(Activity("create PO"), Activity("approve PO")));
  EXPECT_TRUE(d.has_edge(Activity("create PO"), Activity("reject PO")));
  EXPECT_FALSE(d.has_edge(Activity("reject PO"), Activity("create invoice")));
  EXPECT_EQ(d.nodes.size(), 4u);
}

TEST(DfgOfLog, PermutationInvariant) {
  auto log = enumerate_language(parse_tree("+( 'a', X( 'b', ->( 'c', 'd' ) ), *( 'e', tau ) )"));
  Dfg base = dfg_of_log(log);
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    rng.shuffle(log.traces);
    EXPECT_EQ(dfg_of_log(log), base);
  }
}

TEST(Footprint, Relations) {
  const ActivitySet ab{Activity("a"), Activity("b")};
  Dfg d;
  d.add_edge(Activity("a"), Activity("b"));
  auto fp = footprint_of_dfg(d, ab);
  EXPECT_EQ(fp.at(Activity("a"), Activity("b")), Relation::Precedes);
  EXPECT_EQ(fp.at(Activity("b"), Activity("a")), Relation::Follows);

  d.add_edge(Activity("b"), Activity("a"));
  EXPECT_EQ(footprint_of_dfg(d, ab).at(Activity("a"), Activity("b")), Relation::Parallel);

  auto empty = footprint_of_dfg(Dfg{}, ab);
  EXPECT_EQ(empty.at(Activity("a"), Activity("b")), Relation::Unrelated);
  EXPECT_EQ(empty.at(Activity("b"), Activity("a")), Relation::Unrelated);
}

TEST(Footprint, IgnoresEdgesOutsideAlphabet) {
  Dfg d;
  d.add_edge(Activity("a"), Activity("z"));
  auto fp = footprint_of_dfg(d, {Activity("a"), Activity("b")});
  EXPECT_EQ(fp.size(), 2u);
  EXPECT_EQ(fp.at(Activity("a"), Activity("b")), Relation::Unrelated);
  EXPECT_THROW(fp.at(Activity("a"), Activity("z")), std::out_of_range);
}

TEST(Footprint, AntisymmetryOnRandomDfgs) {
  Rng rng(21);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + rng.index(7);
    ActivitySet acts;
    for (std::size_t i = 0; i < n; ++i) acts.insert(Activity("v" + std::to_string(i)));
    std::vector<Activity> v(acts.begin(), acts.end());
    Dfg d;
    std::set<Edge> edges;
    for (const auto& x : v) {
      for (const auto& y : v) {
        if (rng.coin()) {
          d.add_edge(x, y);
          edges.emplace(x, y);
        }
      }
    }
    auto fp = footprint_of_dfg(d, acts);
    for (const auto& x : v) {
      for (const auto& y : v) {
        const Relation r = fp.at(x, y);
        EXPECT_EQ(r, oracle::naive_relation(edges, x, y));
        EXPECT_EQ(r == Relation::Precedes, fp.at(y, x) == Relation::Follows);
        if (r == Relation::Parallel || r == Relation::Unrelated) {
          EXPECT_EQ(fp.at(y, x), r);
        }
      }
    }
  }
}

}  // namespace
}  // namespace semproc
