#include <gtest/gtest.h>

#include <deque>

#include "oracles.hpp"
#include "support.hpp"

using namespace govrt;
using govrt::testing::bootstrap;

namespace {

constexpr std::array<NodeKind, 8> kKinds{NodeKind::skill,  NodeKind::capability, NodeKind::evaluator, NodeKind::benchmark,
                                         NodeKind::config, NodeKind::mutation,   NodeKind::trace,     NodeKind::context};
constexpr std::array<Relation, 8> kRelations{Relation::depends_on,  Relation::generated_by, Relation::validated_by,
                                             Relation::improves,    Relation::supersedes,   Relation::mutated_from,
                                             Relation::composed_with, Relation::fails_under};

GraphNode bare(const std::string& id, NodeKind kind, std::optional<LifecycleState> lc = std::nullopt) {
  GraphNode n;
  n.node_id = id;
  n.kind = kind;
  n.tau.lifecycle = lc;
  return n;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const KernelError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::NotFound;
}

}  // namespace

TEST(Graph, AddNodeMirrorsRegistry) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto v0 = k.snapshot()->graph.version();
  std::vector<std::string> ids;
  for (int i = 0; i < 5; ++i) {
    k.transact("operator", [&](CommandContext& ctx) {
      ids.push_back(ops::register_capability(ctx, "tool " + std::to_string(i), CapabilityKind::tool, "ev-000000")
                        .capability_id);
    });
  }
  for (const auto& id : ids) {
    const auto n = k.add_node(id, NodeKind::capability);
    EXPECT_EQ(n.tau.lifecycle, LifecycleState::experimental);
    EXPECT_EQ(n.content_hash, find_capability(*k.snapshot(), id)->content_hash);
  }
  EXPECT_EQ(k.snapshot()->graph.version(), v0 + 5);
  EXPECT_EQ(code_of([&] { k.add_node(ids[0], NodeKind::capability); }), ErrorCode::DuplicateNode);
  EXPECT_EQ(code_of([&] { k.add_node("ghost", NodeKind::capability); }), ErrorCode::UnknownEntity);
  EXPECT_EQ(k.events().back().kind, EventKind::graph_updated);
  (void)w;
}

TEST(Graph, EdgeErrors) {
  Kernel k;
  const auto w = bootstrap(k);
  EXPECT_EQ(code_of([&] { k.add_edge(w.skill, Relation::validated_by, "ghost"); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code_of([&] { k.add_edge(w.skill, Relation::depends_on, w.skill); }), ErrorCode::SelfEdge);
  EXPECT_EQ(code_of([&] { k.add_edge(w.skill, Relation::validated_by, w.config); }), ErrorCode::KindMismatch);
  k.add_edge(w.skill, Relation::validated_by, w.eval_a);
  EXPECT_EQ(code_of([&] { k.add_edge(w.skill, Relation::validated_by, w.eval_a); }), ErrorCode::DuplicateEdge);
  k.add_edge(w.eval_a, Relation::supersedes, w.eval_b);
  EXPECT_EQ(code_of([&] { k.add_edge(w.eval_b, Relation::supersedes, w.eval_a); }), ErrorCode::CycleViolation);
  // improves may cycle.
  k.add_edge(w.eval_a, Relation::improves, w.eval_b);
  EXPECT_NO_THROW(k.add_edge(w.eval_b, Relation::improves, w.eval_a));
}

TEST(Graph, RandomInsertionsMatchKindTableAndDfs) {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 5; ++round) {
    RuntimeGraph g;
    oracle::EdgeModel model;
    std::vector<std::pair<std::string, NodeKind>> nodes;
    for (int i = 0; i < 24; ++i) {
      // Skew towards capability kinds so the acyclic relations see real traffic.
      const NodeKind kind = rng() % 3 ? NodeKind::skill : kKinds[rng() % kKinds.size()];
      nodes.push_back({"n" + std::to_string(i), kind});
      g.insert_node(bare(nodes.back().first, kind));
    }
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto& [s, sk] = nodes[rng() % nodes.size()];
      const auto& [d, dk] = nodes[rng() % nodes.size()];
      const Relation rel = kRelations[rng() % kRelations.size()];
      const bool want = model.try_insert(s, rel, d, sk, dk);
      bool got = true;
      try {
        g.check_edge(s, rel, d);
        g.insert_edge(GraphEdge{s, rel, d, "ev-000000"});
      } catch (const KernelError&) {
        got = false;
      }
      ASSERT_EQ(got, want) << s << " " << to_string(rel) << " " << d;
      accepted += got;
    }
    EXPECT_GT(accepted, 50);
    EXPECT_TRUE(g.verify().empty());
  }
}

TEST(Graph, QualityExample) {
  EXPECT_NEAR(quality_score({0.9, 0.8, 0.7, 0.5, 0.4}, QualityWeights{}), 2.5, 1e-12);
  QualityWeights no_risk;
  no_risk.omega_rho = 0.0;
  EXPECT_EQ(quality_score({0.9, 0.8, 0.7, 0.5, 0.0}, no_risk), quality_score({0.9, 0.8, 0.7, 0.5, 1.0}, no_risk));
}

TEST(Graph, QualityMatchesDuplicateArithmetic) {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const QualityComponents c{unit(rng), unit(rng), unit(rng), unit(rng), unit(rng)};
    const QualityWeights w{weight(rng), weight(rng), weight(rng), weight(rng), weight(rng)};
    EXPECT_NEAR(quality_score(c, w), oracle::quality(c, w), 1e-12);
  }
}

TEST(Graph, KernelQualityCachesAndRejectsTraces) {
  Kernel k;
  const auto w = bootstrap(k);
  k.record_evaluation(w.skill, w.eval_a, {}, QualityComponents{0.9, 0.8, 0.7, 0.5, 0.4});
  EXPECT_NEAR(k.quality(w.skill), 2.5, 1e-12);
  EXPECT_NEAR(*k.snapshot()->graph.node(w.skill).q, 2.5, 1e-12);
  std::string trace;
  for (const auto& [id, n] : k.snapshot()->graph.nodes()) {
    if (n.kind == NodeKind::trace) trace = id;
  }
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(code_of([&] { k.quality(trace); }), ErrorCode::NoQualityComponents);
  EXPECT_EQ(code_of([&] { k.quality("ghost"); }), ErrorCode::UnknownNode);
}

TEST(Graph, LineageChain) {
  RuntimeGraph g;
  for (const char* id : {"A", "B", "C"}) g.insert_node(bare(id, NodeKind::skill));
  g.insert_edge({"A", Relation::mutated_from, "B", "ev-000000"});
  g.insert_edge({"B", Relation::mutated_from, "C", "ev-000000"});
  const auto rep = g.lineage("A");
  ASSERT_EQ(rep.ancestry.size(), 3u);
  EXPECT_EQ(rep.ancestry[0].node_id, "A");
  EXPECT_EQ(rep.ancestry[1].node_id, "B");
  EXPECT_EQ(rep.ancestry[2].node_id, "C");
  EXPECT_EQ(rep.ancestry[2].via, Relation::mutated_from);
  EXPECT_EQ(g.lineage("C").ancestry.size(), 1u);
  EXPECT_THROW(g.lineage("Z"), KernelError);
}

TEST(Graph, LineageMatchesTransitiveClosure) {
  std::mt19937_64 rng(79);
  const std::array<Relation, 3> lineage_rels{Relation::generated_by, Relation::mutated_from, Relation::supersedes};
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 2 + rng() % 199;
    RuntimeGraph g;
    std::vector<std::string> ids;
    std::vector<NodeKind> kinds;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("v" + std::to_string(1000 + i));
      kinds.push_back(rng() % 6 ? NodeKind::skill : NodeKind::trace);
      g.insert_node(bare(ids.back(), kinds.back()));
    }
    std::map<std::string, std::vector<std::string>> parents;
    for (std::size_t e = 0; e < n * 2; ++e) {
      // Edges always point to a lower index, so the graph is a DAG.
      const std::size_t a = 1 + rng() % (n - 1);
      const std::size_t b = rng() % a;
      const Relation rel = lineage_rels[rng() % 3];
      if (!kind_allowed(rel, kinds[a], kinds[b]) || g.has_edge(ids[a], rel, ids[b])) continue;
      g.insert_edge({ids[a], rel, ids[b], "ev-000000"});
      parents[ids[a]].push_back(ids[b]);
      if (rng() % 4 == 0 && kinds[a] == NodeKind::skill && kinds[b] == NodeKind::skill &&
          !g.has_edge(ids[a], Relation::depends_on, ids[b])) {
        g.insert_edge({ids[a], Relation::depends_on, ids[b], "ev-000000"});  // not a lineage relation
      }
    }
    for (std::size_t probe = 0; probe < 10; ++probe) {
      const std::string start = ids[rng() % n];
      std::map<std::string, std::size_t> dist{{start, 0}};
      std::deque<std::string> q{start};
      while (!q.empty()) {
        const auto cur = q.front();
        q.pop_front();
        for (const auto& p : parents[cur]) {
          if (dist.emplace(p, dist[cur] + 1).second) q.push_back(p);
        }
      }
      const auto rep = g.lineage(start);
      std::map<std::string, std::size_t> got;
      for (const auto& e : rep.ancestry) got[e.node_id] = e.depth;
      EXPECT_EQ(got, dist);
      EXPECT_EQ(rep.ancestry.size(), dist.size());  // no repeats
    }
  }
}

TEST(Graph, ComposeSingleAndExcluded) {
  RuntimeGraph g;
  g.insert_node(bare("ev", NodeKind::evaluator));
  g.insert_node(bare("s1", NodeKind::skill));
  g.insert_node(bare("s2", NodeKind::skill));
  GraphNode ctx = bare("ctx", NodeKind::context);
  ctx.tag = "binary";
  g.insert_node(ctx);
  g.insert_edge({"s1", Relation::validated_by, "ev", "e"});
  g.insert_edge({"s2", Relation::validated_by, "ev", "e"});
  const auto q = [](const std::string& id) { return QualityComponents{id == "s1" ? 0.9 : 0.5, 0, 0, 0, 0}; };
  const std::vector<std::string> one{"s1"};
  EXPECT_EQ(compose(g, one, {}, QualityWeights{}, q).skills, one);
  g.insert_edge({"s1", Relation::fails_under, "ctx", "e"});
  const std::vector<std::string> both{"s1", "s2"};
  EXPECT_EQ(compose(g, both, {"binary"}, QualityWeights{}, q).skills, std::vector<std::string>{"s2"});
  EXPECT_EQ(compose(g, both, {"other"}, QualityWeights{}, q).skills, both);
  const std::vector<std::string> bad{"ev"};
  EXPECT_EQ(code_of([&] { compose(g, bad, {}, QualityWeights{}, q); }), ErrorCode::NotASkill);
}

TEST(Graph, ComposeMatchesSubsetSearch) {
  std::mt19937_64 rng(80);
  int nonempty = 0;
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t n = 1 + rng() % 10;
    RuntimeGraph g;
    oracle::ComposeInstance in;
    g.insert_node(bare("eval", NodeKind::evaluator));
    GraphNode c1 = bare("ctx1", NodeKind::context);
    c1.tag = "shift";
    GraphNode c2 = bare("ctx2", NodeKind::context);
    c2.tag = "calm";
    g.insert_node(c1);
    g.insert_node(c2);
    std::map<std::string, QualityComponents> comps;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "s" + std::to_string(i);
      const bool canonical = rng() % 6 == 0;
      g.insert_node(bare(id, NodeKind::skill, canonical ? LifecycleState::canonical : LifecycleState::validated));
      in.skills.push_back(id);
      if (canonical) in.canonical.insert(id);
      // Quarter steps make equal sums, and therefore tie-breaks, common.
      auto step = [&] { return static_cast<double>(rng() % 5) / 4.0; };
      comps[id] = QualityComponents{step(), step(), 0.0, 0.0, step()};
      in.q[id] = oracle::quality(comps[id], QualityWeights{});
      if (rng() % 10 < 7) {
        g.insert_edge({id, Relation::validated_by, "eval", "e"});
        in.validated.insert(id);
      }
      if (rng() % 7 == 0) {
        const bool hit = rng() % 2;
        g.insert_edge({id, Relation::fails_under, hit ? "ctx1" : "ctx2", "e"});
        if (hit) in.failing.insert(id);
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (rng() % 5 == 0) {
          const std::string dep = "s" + std::to_string(j);
          g.insert_edge({id, Relation::depends_on, dep, "e"});
          in.deps[id].push_back(dep);
        }
      }
    }
    const auto lookup = [&](const std::string& id) -> std::optional<QualityComponents> { return comps.at(id); };
    const auto got = compose(g, in.skills, {"shift"}, QualityWeights{}, lookup);
    const auto [want, want_sum] = oracle::best_subset(in);
    ASSERT_EQ(got.skills, want) << "instance " << inst;
    EXPECT_NEAR(got.total_quality, want_sum, 1e-12);
    EXPECT_TRUE(got.exhaustive);
    if (!got.skills.empty()) {
      ++nonempty;
      EXPECT_TRUE(is_feasible_composition(g, got.skills, {"shift"}));
    }
  }
  EXPECT_GT(nonempty, 150);
}

TEST(Graph, ComposeLargeSetsAreGreedyButFeasible) {
  std::mt19937_64 rng(81);
  RuntimeGraph g;
  g.insert_node(bare("eval", NodeKind::evaluator));
  std::vector<std::string> ids;
  std::map<std::string, QualityComponents> comps;
  for (int i = 0; i < 40; ++i) {
    ids.push_back("s" + std::to_string(100 + i));
    g.insert_node(bare(ids.back(), NodeKind::skill));
    if (rng() % 4) g.insert_edge({ids.back(), Relation::validated_by, "eval", "e"});
    if (i > 0 && rng() % 3 == 0) g.insert_edge({ids.back(), Relation::depends_on, ids[rng() % i], "e"});
    comps[ids.back()] = QualityComponents{std::uniform_real_distribution<double>(0, 1)(rng), 0, 0, 0, 0.5};
  }
  const auto lookup = [&](const std::string& id) -> std::optional<QualityComponents> { return comps.at(id); };
  const auto got = compose(g, ids, {}, QualityWeights{}, lookup);
  EXPECT_FALSE(got.exhaustive);
  EXPECT_FALSE(got.skills.empty());
  EXPECT_TRUE(is_feasible_composition(g, got.skills, {}));

  for (int i = 0; i < 30; ++i) {
    ids.push_back("t" + std::to_string(100 + i));
    g.insert_node(bare(ids.back(), NodeKind::skill));
  }
  EXPECT_EQ(code_of([&] { compose(g, ids, {}, QualityWeights{}, lookup); }), ErrorCode::TooManySkills);
}

TEST(Graph, EligibilityMatchesPredicate) {
  std::mt19937_64 rng(82);
  for (int round = 0; round < 50; ++round) {
    RuntimeGraph g;
    const std::size_t n = 2 + rng() % 30;
    std::vector<std::string> ids;
    std::map<std::string, LifecycleState> state;
    std::set<std::string> retired;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("c" + std::to_string(i));
      state[ids.back()] = kAllLifecycleStates[rng() % 5];
      g.insert_node(bare(ids.back(), NodeKind::skill, state[ids.back()]));
      if (rng() % 10 == 0) {
        g.set_retired(ids.back());
        retired.insert(ids.back());
      }
    }
    std::vector<std::pair<std::string, std::string>> supersedes;  // successor, predecessor
    for (std::size_t e = 0; e < n; ++e) {
      const std::size_t a = 1 + rng() % (n - 1);
      const std::size_t b = rng() % a;
      if (g.has_edge(ids[a], Relation::supersedes, ids[b])) continue;
      g.insert_edge({ids[a], Relation::supersedes, ids[b], "e"});
      supersedes.push_back({ids[a], ids[b]});
    }
    for (const auto& id : ids) {
      bool want = state[id] != LifecycleState::deprecated && !retired.count(id);
      for (const auto& [succ, pred] : supersedes) {
        if (pred == id && (state[succ] == LifecycleState::trusted || state[succ] == LifecycleState::canonical)) {
          want = false;
        }
      }
      EXPECT_EQ(g.eligible_for_selection(id), want) << id;
    }
  }
  RuntimeGraph g;
  g.insert_node(bare("x", NodeKind::skill, LifecycleState::experimental));
  EXPECT_TRUE(g.eligible_for_selection("x"));
  g.set_lifecycle("x", LifecycleState::deprecated);
  EXPECT_FALSE(g.eligible_for_selection("x"));
  EXPECT_THROW(g.eligible_for_selection("y"), KernelError);
}

TEST(Graph, SerializationRoundTripAndPhiConsistency) {
  Kernel k;
  const auto w = bootstrap(k);
  k.add_edge(w.skill, Relation::validated_by, w.eval_a);
  k.add_edge(w.skill, Relation::fails_under, w.bench);
  const auto s = k.snapshot();
  const RuntimeGraph back = Json(s->graph).get<RuntimeGraph>();
  EXPECT_EQ(back, s->graph);
  EXPECT_EQ(canonical_serialize(Json(back)), canonical_serialize(Json(s->graph)));
  for (const auto& [id, cap] : s->reg.capabilities) {
    const GraphNode& n = s->graph.node(id);
    EXPECT_EQ(n.content_hash, cap.content_hash);
    EXPECT_EQ(n.tau.lifecycle, cap.lifecycle);
  }
  for (const auto& e : s->graph.edges()) {
    EXPECT_NE(std::find(kRelations.begin(), kRelations.end(), e.relation), kRelations.end());
  }
}
