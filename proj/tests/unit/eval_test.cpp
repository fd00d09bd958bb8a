#include <gtest/gtest.h>

#include <map>
#include <set>

#include "semproc/eval/evaluate.hpp"
#include "semproc/instructions/compile.hpp"
#include "semproc/taskgen/generate.hpp"
#include "support/oracles.hpp"

namespace semproc {
namespace {

const ActivitySet kShop{Activity("Confirm order"), Activity("Confirm"), Activity("Ship order")};

// F1 via 2tp / (2tp + fp + fn); unparseable (nullopt) is only a miss.
double naive_macro_f1(const std::vector<std::string>& g, const std::vector<std::optional<std::string>>& p,
                      const std::set<std::string>& classes) {
  double sum = 0;
  for (const auto& c : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const bool pc = p[i] && *p[i] == c;
      if (g[i] == c && pc) tp++;
      if (g[i] != c && pc) fp++;
      if (g[i] == c && !pc) fn++;
    }
    sum += tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
  }
  return sum / static_cast<double>(classes.size());
}

TEST(ParseOutput, Examples) {
  auto b = parse_output(TaskKind::TSad, "The answer is: False", {});
  ASSERT_TRUE(b.parsed());
  EXPECT_FALSE(std::get<bool>(b.value));
  EXPECT_TRUE(std::get<bool>(parse_output(TaskKind::ASad, "```\nTRUE\n```", {}).value));
  EXPECT_FALSE(parse_output(TaskKind::ASad, "I cannot determine this", {}).parsed());
  EXPECT_FALSE(parse_output(TaskKind::ASad, "True or False?", {}).parsed());
  EXPECT_FALSE(parse_output(TaskKind::ASad, "untrue", {}).parsed());

  auto a = parse_output(TaskKind::SNap, "Confirm order", kShop);
  EXPECT_EQ(std::get<Activity>(a.value), Activity("Confirm order"));
  EXPECT_EQ(std::get<Activity>(parse_output(TaskKind::SNap, "Answer: ship ORDER.", kShop).value),
            Activity("Ship order"));
  EXPECT_FALSE(parse_output(TaskKind::SNap, "Cancel", kShop).parsed());
  EXPECT_EQ(parse_output(TaskKind::SNap, "  ", kShop).raw, "  ");
}

TEST(ParseOutput, DfgForms) {
  auto d = parse_output(TaskKind::SDfd, "Here you go:\n'a' -> 'b'\n- b -> c\n'c' -> 'a', 'a' -> 'c'\nthanks", {});
  ASSERT_TRUE(d.parsed());
  const auto& g = std::get<Dfg>(d.value);
  EXPECT_EQ(g.edges.size(), 4u);
  EXPECT_TRUE(g.has_edge(Activity("b"), Activity("c")));
  EXPECT_TRUE(g.has_edge(Activity("a"), Activity("c")));
  EXPECT_TRUE(std::get<Dfg>(parse_output(TaskKind::SDfd, "none", {}).value).edges.empty());
  EXPECT_FALSE(parse_output(TaskKind::SDfd, "no idea", {}).parsed());
  auto q = parse_output(TaskKind::SDfd, R"('it\'s' -> 'x -> y')", {});
  EXPECT_TRUE(std::get<Dfg>(q.value).has_edge(Activity("it's"), Activity("x -> y")));
}

TEST(ParseOutput, TreeAndTrace) {
  auto t = parse_output(TaskKind::SPtd, "The tree is:\n->( 'a', 'b' ).\n", {});
  ASSERT_TRUE(t.parsed());
  EXPECT_EQ(serialize_tree(std::get<ProcessTree>(t.value)), "->( 'a', 'b' )");
  EXPECT_FALSE(parse_output(TaskKind::SPtd, "->( 'a'", {}).parsed());
  const ActivitySet ab{Activity("a"), Activity("b")};
  auto tr = parse_output(TaskKind::TSad, VariantTag::NegativeInversion, "[a, B]", ab);
  EXPECT_EQ(std::get<Trace>(tr.value), make_trace({"a", "b"}));
  EXPECT_FALSE(parse_output(TaskKind::TSad, VariantTag::NegativeInversion, "[a, z]", ab).parsed());
}

TEST(MacroF1, Examples) {
  const std::set<std::string> tf{"True", "False"};
  std::vector<std::string> g{"True", "False", "True", "False"};
  std::vector<std::optional<std::string>> all_true(4, "True");
  EXPECT_DOUBLE_EQ(macro_f1(g, {"True", "False", "True", "False"}, tf).macro, 1.0);
  EXPECT_NEAR(macro_f1(g, all_true, tf).macro, 1.0 / 3.0, 1e-12);
  std::vector<std::optional<std::string>> none(4, std::nullopt);
  EXPECT_DOUBLE_EQ(macro_f1(g, none, tf).macro, 0.0);
  EXPECT_EQ(macro_f1(g, none, tf).per_class.at("True").fp, 0u);
  EXPECT_THROW(macro_f1(g, all_true, {}), std::invalid_argument);
  EXPECT_THROW(macro_f1(g, {"True"}, tf), std::invalid_argument);
}

TEST(MacroF1, OracleAgreementAndInvariances) {
  Rng rng(77);
  for (int round = 0; round < 500; ++round) {
    const std::size_t k = 2 + rng.index(4), n = 1 + rng.index(60);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < k; ++i) labels.push_back("c" + std::to_string(i));
    std::vector<std::string> g;
    std::vector<std::optional<std::string>> p;
    for (std::size_t i = 0; i < n; ++i) {
      g.push_back(labels[rng.index(k)]);
      if (rng.index(10) == 0) {
        p.push_back(std::nullopt);
      } else {
        p.push_back(labels[rng.index(k)]);
      }
    }
    const std::set<std::string> classes(g.begin(), g.end());
    const double m = macro_f1(g, p, classes).macro;
    EXPECT_NEAR(m, naive_macro_f1(g, p, classes), 1e-12);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<std::string> g2;
    std::vector<std::optional<std::string>> p2;
    for (auto i : idx) {
      g2.push_back(g[i]);
      p2.push_back(p[i]);
    }
    EXPECT_NEAR(macro_f1(g2, p2, classes).macro, m, 1e-12);

    auto rename = [](const std::string& s) { return "renamed-" + s + "!"; };
    std::vector<std::string> g3;
    std::vector<std::optional<std::string>> p3;
    std::set<std::string> c3;
    for (std::size_t i = 0; i < n; ++i) {
      g3.push_back(rename(g[i]));
      p3.push_back(p[i] ? std::optional(rename(*p[i])) : std::nullopt);
    }
    for (const auto& c : classes) c3.insert(rename(c));
    EXPECT_NEAR(macro_f1(g3, p3, c3).macro, m, 1e-12);
  }
}

TEST(Fitness, HandBuiltExample) {
  const ActivitySet abc{Activity("a"), Activity("b"), Activity("c")};
  Dfg gold, disc;
  gold.add_edge(Activity("a"), Activity("b"));
  gold.add_edge(Activity("b"), Activity("c"));
  disc.add_edge(Activity("a"), Activity("b"));
  EXPECT_DOUBLE_EQ(footprint_fitness(gold, disc, abc), 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(footprint_fitness(gold, gold, abc), 1.0);
  // Empty discovered model: only cells unrelated in gold match (a,c), (c,a).
  EXPECT_DOUBLE_EQ(footprint_fitness(gold, Dfg{}, abc), 2.0 / 6.0);
  // Activities outside the gold alphabet are ignored.
  disc.add_edge(Activity("b"), Activity("c"));
  disc.add_edge(Activity("c"), Activity("zzz"));
  EXPECT_DOUBLE_EQ(footprint_fitness(gold, disc, abc), 1.0);
  EXPECT_DOUBLE_EQ(footprint_fitness(gold, Dfg{}, {Activity("a")}), 1.0);
}

TEST(Fitness, EmptyModelMatchesUnrelatedShare) {
  Rng rng(8);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 2 + rng.index(6);
    ActivitySet acts;
    for (std::size_t i = 0; i < n; ++i) acts.insert(Activity("v" + std::to_string(i)));
    std::set<Edge> edges;
    Dfg gold;
    for (const auto& x : acts) {
      for (const auto& y : acts) {
        if (rng.index(3) == 0) {
          gold.add_edge(x, y);
          edges.emplace(x, y);
        }
      }
    }
    std::size_t unrelated = 0;
    for (const auto& x : acts) {
      for (const auto& y : acts) {
        unrelated += x != y && oracle::naive_relation(edges, x, y) == Relation::Unrelated;
      }
    }
    EXPECT_NEAR(footprint_fitness(gold, Dfg{}, acts), static_cast<double>(unrelated) / (n * (n - 1)), 1e-12);
  }
}

TEST(Fitness, SelfIsOneAndBounded) {
  oracle::TreeGenerator gen(41);
  for (int i = 0; i < 200; ++i) {
    ProcessTree t = gen.next();
    auto acts = activities_of(t);
    if (acts.empty()) continue;
    auto d = tree_dfg(t, {});
    if (!d) continue;
    auto r = model_fitness(*d, acts, nullptr, &t, {});
    EXPECT_DOUBLE_EQ(r.value, 1.0) << serialize_tree(t);
    auto empty = model_fitness(*d, acts, nullptr, nullptr, {});
    EXPECT_TRUE(empty.unparseable);
    EXPECT_DOUBLE_EQ(empty.value, 0.0);
  }
}

TEST(Fitness, RemovingCorrectEdgeNeverHelps) {
  Rng rng(12);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 2 + rng.index(6);
    ActivitySet acts;
    for (std::size_t i = 0; i < n; ++i) acts.insert(Activity("v" + std::to_string(i)));
    Dfg gold, disc;
    for (const auto& x : acts) {
      for (const auto& y : acts) {
        if (rng.coin()) gold.add_edge(x, y);
        if (rng.coin()) disc.add_edge(x, y);
      }
    }
    const double before = footprint_fitness(gold, disc, acts);
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 1.0);
    for (const auto& e : disc.edges) {
      if (!gold.edges.contains(e)) continue;
      Dfg less = disc;
      less.edges.erase(e);
      EXPECT_LE(footprint_fitness(gold, less, acts), before + 1e-12);
    }
  }
}

TEST(Fitness, TreePlayoutOverflowScoresZero) {
  Dfg gold;
  gold.add_edge(Activity("a"), Activity("b"));
  auto wide = parse_tree("+( 'a', 'b', 'c', 'd', 'e' )");
  auto r = model_fitness(gold, {Activity("a"), Activity("b")}, nullptr, &wide, {.trace_cap = 10});
  EXPECT_TRUE(r.playout_overflow);
  EXPECT_EQ(r.value, 0.0);
}

std::vector<InstructionInstance> toy_test_split() {
  auto ds = generate_corpus(read_corpus(default_asset_dir() / "corpus" / "toy.trees"), 3);
  std::vector<TaskInstance> xs;
  for (auto& [k, v] : ds.by_task) xs.insert(xs.end(), v.begin(), v.end());
  ProportionConfig normal;
  for (auto k : kAllTasks) normal[k] = {100, 0, 0};
  return compile(xs, normal, 3, TemplateLibrary::load(default_asset_dir() / "templates"));
}

TEST(Evaluate, OracleResponsesScorePerfectly) {
  auto split = toy_test_split();
  std::vector<Response> rs;
  for (const auto& x : split) rs.push_back({x.instance_id, x.output});
  auto rep = evaluate(split, rs);
  ASSERT_EQ(rep.tasks.size(), 5u);
  for (const auto& [task, s] : rep.tasks) {
    EXPECT_DOUBLE_EQ(s.value, 1.0) << task_name(task);
    EXPECT_EQ(s.parse_failure_rate, 0.0);
  }
  auto j = report_to_json(rep);
  EXPECT_DOUBLE_EQ(j["tasks"]["A-SAD"]["reference"]["Mistral IT"].get<double>(), 0.679);
  EXPECT_NE(report_to_text(rep).find("0.868"), std::string::npos);
  EXPECT_TRUE(parse_failures_above(rep, 0.0).empty());
}

TEST(Evaluate, ConstantTrueAndMissingResponses) {
  auto split = toy_test_split();
  std::vector<InstructionInstance> tsad;
  for (const auto& x : split) {
    if (x.task == TaskKind::TSad) tsad.push_back(x);
  }
  std::vector<Response> rs;
  for (const auto& x : tsad) rs.push_back({x.instance_id, "True"});
  EXPECT_NEAR(evaluate(tsad, rs).tasks.at(TaskKind::TSad).value, 1.0 / 3.0, 1e-4);

  rs.resize(rs.size() / 2);
  auto rep = evaluate(tsad, rs);
  EXPECT_EQ(rep.tasks.at(TaskKind::TSad).missing_responses, tsad.size() - rs.size());
  EXPECT_GT(rep.tasks.at(TaskKind::TSad).parse_failure_rate, 0.4);
  EXPECT_EQ(parse_failures_above(rep, 0.2), std::vector<TaskKind>{TaskKind::TSad});

  rs.push_back({"no-such-id", "True"});
  EXPECT_THROW(evaluate(tsad, rs), ResponseMismatch);
}

}  // namespace
}  // namespace semproc
