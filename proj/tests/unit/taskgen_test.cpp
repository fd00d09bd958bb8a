#include <gtest/gtest.h>

#include <map>
#include <set>

#include "semproc/taskgen/generate.hpp"
#include "support/oracles.hpp"

namespace semproc {
namespace {

const char* kToyThree =
    "purchase-order\t->( 'create PO', X( 'reject PO', ->( 'approve PO', 'create invoice' ) ) )\n"
    "loan-application\t->( 'register application', 'review application', "
    "X( 'approve application', 'reject application' ), 'notify applicant' )\n"
    "travel-booking\t->( 'request trip', +( 'book flight', 'book hotel' ), 'confirm booking' )\n";

std::size_t count_label(const std::vector<TaskInstance>& xs, AnomalyLabel l) {
  std::size_t n = 0;
  for (const auto& x : xs) n += std::get<AnomalyLabel>(x.gold) == l;
  return n;
}

TEST(GenTsad, ReviewBeforeApproveAnomaly) {
  auto tree = parse_tree(
      "->( 'register application', 'review application', 'approve application' )");
  oracle::Acceptor acc(tree, 2);
  EXPECT_FALSE(acc.accepts(
      make_trace({"register application", "approve application", "review application"})));
  auto g = gen_tsad(tree, "m", 1);
  ASSERT_FALSE(g.skipped);
  ASSERT_EQ(g.instances.size(), 2u);
  EXPECT_EQ(std::get<AnomalyLabel>(g.instances[0].gold), AnomalyLabel::Valid);
  EXPECT_EQ(std::get<AnomalyLabel>(g.instances[1].gold), AnomalyLabel::Anomalous);
  EXPECT_FALSE(acc.accepts(std::get<TracePayload>(g.instances[1].payload).trace));
}

TEST(GenTsad, SingleActivitySkipped) {
  EXPECT_TRUE(gen_tsad(parse_tree("'a'"), "m", 1).skipped);
  EXPECT_TRUE(gen_asad(parse_tree("*( 'a', tau )"), "m", 1).skipped);
}

TEST(GenAsad, PaperPairs) {
  auto tree = parse_tree(
      "->( 'register application', 'review application', 'approve application' )");
  auto g = gen_asad(tree, "m", 4);
  ASSERT_FALSE(g.skipped);
  std::map<std::pair<std::string, std::string>, AnomalyLabel> labels;
  for (const auto& x : g.instances) {
    const auto& p = std::get<PairPayload>(x.payload);
    labels[{p.first.label(), p.second.label()}] = std::get<AnomalyLabel>(x.gold);
  }
  EXPECT_EQ(labels.at({"register application", "approve application"}), AnomalyLabel::Valid);
  EXPECT_EQ(labels.at({"approve application", "review application"}), AnomalyLabel::Anomalous);
}

TEST(GenAsad, ParallelHasNoAnomaly) {
  EXPECT_TRUE(gen_asad(parse_tree("+( 'a', 'b' )"), "m", 1).skipped);
}

TEST(GenSnap, PurchaseOrderNextActivity) {
  auto tree = parse_tree("->( 'create PO', X( 'reject PO', ->( 'approve PO', 'create invoice' ) ) )");
  auto g = gen_snap(tree, "po", 2);
  bool found = false;
  for (const auto& x : g.instances) {
    const auto& p = std::get<PrefixPayload>(x.payload);
    if (p.prefix == make_trace({"create PO", "approve PO"})) {
      found = true;
      EXPECT_EQ(std::get<Activity>(x.gold), Activity("create invoice"));
      EXPECT_FALSE(p.prefix_completes);
      EXPECT_TRUE(p.impossible_next.contains(Activity("reject PO")));
      EXPECT_FALSE(p.impossible_next.contains(Activity("create invoice")));
    }
  }
  EXPECT_TRUE(found);
}

TEST(GenSnap, LastPrefixGivesLastActivity) {
  auto g = gen_snap(parse_tree("->( 'a', 'b', 'c' )"), "m", 1);
  ASSERT_EQ(g.instances.size(), 2u);
  for (const auto& x : g.instances) {
    const auto& p = std::get<PrefixPayload>(x.payload);
    if (p.prefix.size() == 2) {
      EXPECT_EQ(std::get<Activity>(x.gold), Activity("c"));
    }
  }
}

TEST(GenDiscovery, Golds) {
  const std::string po = "->( 'create PO', X( 'reject PO', ->( 'approve PO', 'create invoice' ) ) )";
  auto [dfd, ptd] = gen_discovery(parse_tree(po), "po", 0);
  EXPECT_TRUE(std::get<Dfg>(dfd.gold).has_edge(Activity("create PO"), Activity("approve PO")));
  EXPECT_EQ(serialize_tree(std::get<ProcessTree>(ptd.gold)), po);
  EXPECT_TRUE(std::holds_alternative<NoPayload>(dfd.payload));

  auto [one, _] = gen_discovery(parse_tree("'a'"), "leaf", 0);
  const auto& d = std::get<Dfg>(one.gold);
  EXPECT_EQ(d.nodes.size(), 1u);
  EXPECT_TRUE(d.edges.empty());
}

// Counts for the three-model corpus, computed from the naive enumerator:
// every language is smaller than the trace cap, so all traces are sampled.
TEST(GenerateCorpus, ToyThreeCountsMatchOracle) {
  auto corpus = parse_corpus(kToyThree);
  auto ds = generate_corpus(corpus, 7);

  std::size_t tsad = 0, snap_raw = 0, snap_dedup = 0, asad = 0;
  for (const auto& e : corpus) {
    auto lang = oracle::naive_language(e.tree, 2);
    tsad += 2 * std::min<std::size_t>(50, lang.size());
    std::set<std::pair<Trace, Activity>> keys;
    std::set<EfPair> ef;
    for (const auto& t : lang) {
      snap_raw += t.size() - 1;
      for (std::size_t k = 1; k < t.size(); ++k) {
        Trace prefix(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k));
        if (!lang.contains(prefix)) keys.emplace(prefix, t[k]);
      }
      for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
          if (t[i] != t[j]) ef.insert({t[i], t[j]});
        }
      }
    }
    snap_dedup += keys.size();
    std::size_t rev = 0;
    for (const auto& p : ef) rev += !ef.contains({p.later, p.earlier});
    asad += 2 * std::min(ef.size(), rev);
  }
  // Frozen oracle values.
  EXPECT_EQ(tsad, 12u);
  EXPECT_EQ(asad, 36u);
  EXPECT_EQ(snap_raw, 15u);
  EXPECT_EQ(snap_dedup, 14u);

  EXPECT_EQ(ds.by_task[TaskKind::TSad].size(), tsad);
  EXPECT_EQ(count_label(ds.by_task[TaskKind::TSad], AnomalyLabel::Valid), tsad / 2);
  EXPECT_EQ(ds.by_task[TaskKind::ASad].size(), asad);
  EXPECT_EQ(count_label(ds.by_task[TaskKind::ASad], AnomalyLabel::Anomalous), asad / 2);
  std::size_t raw = 0;
  for (const auto& e : corpus) raw += gen_snap(e.tree, e.model_id, 1).instances.size();
  EXPECT_EQ(raw, snap_raw);
  EXPECT_EQ(ds.by_task[TaskKind::SNap].size(), snap_dedup);
  EXPECT_EQ(ds.by_task[TaskKind::SDfd].size(), 3u);
  EXPECT_EQ(ds.by_task[TaskKind::SPtd].size(), 3u);
}

TEST(GenerateCorpus, PropertiesOnRandomTrees) {
  oracle::TreeGenerator gen(17);
  std::vector<CorpusEntry> corpus;
  for (int i = 0; i < 120; ++i) corpus.push_back({"m" + std::to_string(i), gen.next()});
  auto ds = generate_corpus(corpus, 99, {.language = {.trace_cap = 1500}});
  std::map<std::string, const ProcessTree*> trees;
  for (const auto& e : corpus) trees[e.model_id] = &e.tree;

  for (const auto& x : ds.by_task[TaskKind::TSad]) {
    oracle::Acceptor acc(*trees.at(x.model_id), 2);
    const auto& trace = std::get<TracePayload>(x.payload).trace;
    EXPECT_EQ(acc.accepts(trace), std::get<AnomalyLabel>(x.gold) == AnomalyLabel::Valid);
    for (const auto& a : trace) EXPECT_TRUE(x.activity_set.contains(a));
  }
  for (const auto& x : ds.by_task[TaskKind::ASad]) {
    auto lang = oracle::naive_language(*trees.at(x.model_id), 2);
    const auto& p = std::get<PairPayload>(x.payload);
    bool occurs = false;
    for (const auto& t : lang) occurs = occurs || ef_pairs(t).contains({p.first, p.second});
    EXPECT_EQ(occurs, std::get<AnomalyLabel>(x.gold) == AnomalyLabel::Valid);
  }
  // Balance holds per model before cross-model dedup.
  for (const auto& e : corpus) {
    if (tree_depth(e.tree) > 3) continue;
    for (auto g : {gen_tsad(e.tree, e.model_id, 5), gen_asad(e.tree, e.model_id, 5)}) {
      if (g.skipped) continue;
      const auto valid = static_cast<long>(count_label(g.instances, AnomalyLabel::Valid));
      const auto bad = static_cast<long>(g.instances.size()) - valid;
      EXPECT_LE(std::abs(valid - bad), 1) << e.model_id;
    }
  }
  for (const auto& x : ds.by_task[TaskKind::SNap]) {
    auto lang = oracle::naive_language(*trees.at(x.model_id), 2);
    Trace w = std::get<PrefixPayload>(x.payload).prefix;
    EXPECT_FALSE(lang.contains(w));
    w.push_back(std::get<Activity>(x.gold));
    bool extends = false;
    for (const auto& t : lang) {
      extends = extends || (t.size() >= w.size() && std::equal(w.begin(), w.end(), t.begin()));
    }
    EXPECT_TRUE(extends);
    EXPECT_TRUE(x.activity_set.contains(std::get<Activity>(x.gold)));
  }
}

TEST(Dedup, IdempotentAndKeepsDistinctGolds) {
  auto corpus = parse_corpus(kToyThree);
  auto ds = generate_corpus(corpus, 3);
  for (auto& [k, xs] : ds.by_task) {
    auto once = dedup(xs);
    EXPECT_EQ(dedup(once).size(), once.size());
  }
  TaskInstance a;
  a.kind = TaskKind::SNap;
  a.model_id = "m";
  a.activity_set = {Activity("a"), Activity("b"), Activity("c")};
  a.payload = PrefixPayload{make_trace({"a"}), false, {}};
  a.gold = Activity("b");
  TaskInstance b = a;
  b.gold = Activity("c");
  TaskInstance c = a;
  EXPECT_EQ(dedup({a, b, c}).size(), 2u);

  TaskInstance t1;
  t1.kind = TaskKind::TSad;
  t1.model_id = "x";
  t1.activity_set = a.activity_set;
  t1.payload = TracePayload{make_trace({"a", "b"})};
  t1.gold = AnomalyLabel::Valid;
  TaskInstance t2 = t1;
  t2.model_id = "y";
  auto d = dedup({t2, t1});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].model_id, "x");
  EXPECT_THROW(dedup({a, t1}), std::invalid_argument);
}

TEST(GenerateCorpus, DeterministicJson) {
  auto corpus = parse_corpus(kToyThree);
  auto a = generate_corpus(corpus, 5);
  auto b = generate_corpus(corpus, 5);
  for (auto k : kAllTasks) {
    EXPECT_EQ(to_jsonl(a.by_task[k]), to_jsonl(b.by_task[k]));
  }
}

TEST(TaskInstanceJson, RoundTrip) {
  auto ds = generate_corpus(parse_corpus(kToyThree), 5);
  for (auto k : kAllTasks) {
    for (const auto& x : ds.by_task[k]) {
      json j = x;
      EXPECT_EQ(json(task_instance_from_json(j)), j);
      EXPECT_TRUE(j.contains("kind") && j.contains("payload") && j.contains("gold"));
    }
  }
}

TEST(Corpus, ParseErrors) {
  EXPECT_THROW(parse_corpus("a\t'x'\na\t'y'\n"), CorpusError);
  EXPECT_THROW(parse_corpus("no-tab-here\n"), CorpusError);
  EXPECT_THROW(parse_corpus("a\t->( 'x'\n"), CorpusError);
  EXPECT_EQ(parse_corpus("# c\n\nm\t'x'\n").size(), 1u);
}

TEST(Corpus, BundledToyCorpus) {
  auto corpus = read_corpus(default_asset_dir() / "corpus" / "toy.trees");
  EXPECT_GE(corpus.size(), 20u);
  auto ds = generate_corpus(corpus, 7);
  EXPECT_EQ(ds.by_task[TaskKind::SPtd].size(), corpus.size());
  EXPECT_GT(ds.by_task[TaskKind::TSad].size(), 100u);
}

}  // namespace
}  // namespace semproc
