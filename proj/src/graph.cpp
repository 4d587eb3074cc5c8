#include "govrt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

namespace govrt {
namespace {

bool is_lineage_relation(Relation rel) {
  return rel == Relation::generated_by || rel == Relation::mutated_from || rel == Relation::supersedes;
}

// A fails_under target matches when its context tag (or, for benchmarks and
// evaluators, its id) is in the active context set.
bool hits_context(const RuntimeGraph& graph, const std::string& skill, const std::set<std::string>& context) {
  for (const GraphEdge* e : graph.out_edges(skill, Relation::fails_under)) {
    const GraphNode* target = graph.find(e->dst);
    if (context.count(e->dst)) return true;
    if (target && target->tag && context.count(*target->tag)) return true;
  }
  return false;
}

bool has_validation(const RuntimeGraph& graph, const std::string& skill) {
  return !graph.out_edges(skill, Relation::validated_by).empty();
}

bool is_canonical(const RuntimeGraph& graph, const std::string& id) {
  const GraphNode* n = graph.find(id);
  return n && n->tau.lifecycle == LifecycleState::canonical;
}

}  // namespace

NodeKind node_kind_for(CapabilityKind kind) {
  switch (kind) {
    case CapabilityKind::skill: return NodeKind::skill;
    case CapabilityKind::evaluator: return NodeKind::evaluator;
    case CapabilityKind::benchmark: return NodeKind::benchmark;
    default: return NodeKind::capability;
  }
}

bool is_capability_node(NodeKind kind) {
  return kind == NodeKind::skill || kind == NodeKind::capability || kind == NodeKind::evaluator ||
         kind == NodeKind::benchmark;
}

bool is_acyclic_relation(Relation rel) {
  return rel == Relation::depends_on || rel == Relation::supersedes || rel == Relation::mutated_from;
}

bool kind_allowed(Relation rel, NodeKind src, NodeKind dst) {
  const bool src_cap = is_capability_node(src);
  const bool dst_cap = is_capability_node(dst);
  switch (rel) {
    case Relation::generated_by:
      return dst == NodeKind::trace;
    case Relation::validated_by:
      return (src_cap || src == NodeKind::config) && (dst == NodeKind::evaluator || dst == NodeKind::benchmark);
    case Relation::mutated_from:
      return (src_cap || src == NodeKind::config) && (dst_cap || dst == NodeKind::config);
    case Relation::improves:
    case Relation::supersedes:
      return src == dst;
    case Relation::depends_on:
      return src_cap && dst_cap;
    case Relation::composed_with:
      return src == NodeKind::skill && dst == NodeKind::skill;
    case Relation::fails_under:
      return (src_cap || src == NodeKind::mutation) &&
             (dst == NodeKind::benchmark || dst == NodeKind::context || dst == NodeKind::evaluator);
  }
  return false;
}

void QualityWeights::validate() const {
  for (double x : {omega_p, omega_r, omega_s, omega_u, omega_rho}) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorCode::InvalidWeights, "quality weights must be finite and >= 0");
  }
}

double quality_score(const QualityComponents& c, const QualityWeights& w) {
  return w.omega_p * c.p + w.omega_r * c.r + w.omega_s * c.s + w.omega_u * c.u - w.omega_rho * c.rho;
}

bool LineageReport::contains(const std::string& node_id) const {
  return std::any_of(ancestry.begin(), ancestry.end(), [&](const auto& e) { return e.node_id == node_id; });
}

bool LineageReport::has_relation(Relation rel) const {
  return std::any_of(ancestry.begin(), ancestry.end(), [&](const auto& e) { return e.via == rel; }) ||
         std::any_of(annotations.begin(), annotations.end(), [&](const auto& e) { return e.relation == rel; });
}

const GraphNode* RuntimeGraph::find(const std::string& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const GraphNode& RuntimeGraph::node(const std::string& id) const {
  const GraphNode* n = find(id);
  if (!n) fail(ErrorCode::UnknownNode, id);
  return *n;
}

std::vector<const GraphEdge*> RuntimeGraph::out_edges(const std::string& id, std::optional<Relation> rel) const {
  std::vector<const GraphEdge*> out;
  if (auto it = out_.find(id); it != out_.end()) {
    for (std::size_t i : it->second) {
      if (!rel || edges_[i].relation == *rel) out.push_back(&edges_[i]);
    }
  }
  return out;
}

std::vector<const GraphEdge*> RuntimeGraph::in_edges(const std::string& id, std::optional<Relation> rel) const {
  std::vector<const GraphEdge*> out;
  if (auto it = in_.find(id); it != in_.end()) {
    for (std::size_t i : it->second) {
      if (!rel || edges_[i].relation == *rel) out.push_back(&edges_[i]);
    }
  }
  return out;
}

GraphEdge RuntimeGraph::normalize(GraphEdge edge) {
  if (edge.relation == Relation::composed_with && edge.dst < edge.src) std::swap(edge.src, edge.dst);
  return edge;
}

bool RuntimeGraph::has_edge(const std::string& src, Relation rel, const std::string& dst) const {
  const GraphEdge probe = normalize(GraphEdge{src, rel, dst, {}});
  for (const GraphEdge* e : out_edges(probe.src, rel)) {
    if (e->dst == probe.dst) return true;
  }
  return false;
}

bool RuntimeGraph::reaches(const std::string& from, const std::string& to, Relation rel) const {
  std::unordered_set<std::string> seen{from};
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    std::string cur = std::move(stack.back());
    stack.pop_back();
    if (cur == to) return true;
    for (const GraphEdge* e : out_edges(cur, rel)) {
      if (seen.insert(e->dst).second) stack.push_back(e->dst);
    }
  }
  return false;
}

void RuntimeGraph::check_edge(const std::string& src, Relation rel, const std::string& dst) const {
  const GraphNode* s = find(src);
  if (!s) fail(ErrorCode::UnknownNode, src);
  const GraphNode* d = find(dst);
  if (!d) fail(ErrorCode::UnknownNode, dst);
  if (src == dst) fail(ErrorCode::SelfEdge, std::string(to_string(rel)) + " on " + src);
  if (!kind_allowed(rel, s->kind, d->kind)) {
    fail(ErrorCode::KindMismatch, std::string(to_string(rel)) + " cannot join " + std::string(to_string(s->kind)) +
                                      " -> " + std::string(to_string(d->kind)));
  }
  if (has_edge(src, rel, dst)) {
    fail(ErrorCode::DuplicateEdge, src + " " + std::string(to_string(rel)) + " " + dst);
  }
  if (is_acyclic_relation(rel) && reaches(dst, src, rel)) {
    fail(ErrorCode::CycleViolation, src + " " + std::string(to_string(rel)) + " " + dst + " closes a cycle");
  }
}

void RuntimeGraph::insert_node(GraphNode node) {
  std::string id = node.node_id;
  nodes_.insert_or_assign(std::move(id), std::move(node));
  ++version_;
}

void RuntimeGraph::index_edge(std::size_t i) {
  out_[edges_[i].src].push_back(i);
  in_[edges_[i].dst].push_back(i);
}

void RuntimeGraph::insert_edge(GraphEdge edge) {
  edge = normalize(std::move(edge));
  if (edge.relation == Relation::generated_by || edge.relation == Relation::mutated_from) {
    if (auto it = nodes_.find(edge.src); it != nodes_.end()) it->second.lineage.push_back(edge.dst);
  }
  edges_.push_back(std::move(edge));
  index_edge(edges_.size() - 1);
  ++version_;
}

void RuntimeGraph::set_quality(const std::string& id, double q) {
  if (auto it = nodes_.find(id); it != nodes_.end()) it->second.q = q;
}

void RuntimeGraph::set_lifecycle(const std::string& id, LifecycleState state) {
  if (auto it = nodes_.find(id); it != nodes_.end()) it->second.tau.lifecycle = state;
}

void RuntimeGraph::set_retired(const std::string& id) {
  if (auto it = nodes_.find(id); it != nodes_.end()) it->second.tau.retired = true;
}

LineageReport RuntimeGraph::lineage(const std::string& id) const {
  if (!find(id)) fail(ErrorCode::UnknownNode, id);
  LineageReport report;
  std::unordered_set<std::string> seen{id};
  std::deque<LineageEntry> queue{LineageEntry{id, 0, std::nullopt, std::nullopt}};
  while (!queue.empty()) {
    LineageEntry cur = std::move(queue.front());
    queue.pop_front();
    for (const GraphEdge* e : out_edges(cur.node_id)) {
      if (!is_lineage_relation(e->relation) || !seen.insert(e->dst).second) continue;
      queue.push_back(LineageEntry{e->dst, cur.depth + 1, cur.node_id, e->relation});
    }
    report.ancestry.push_back(std::move(cur));
  }

  std::set<std::size_t> touching;
  for (const auto& entry : report.ancestry) {
    for (const auto* index : {&out_, &in_}) {
      auto it = index->find(entry.node_id);
      if (it == index->end()) continue;
      for (std::size_t i : it->second) {
        if (!is_lineage_relation(edges_[i].relation)) touching.insert(i);
      }
    }
  }
  for (std::size_t i : touching) report.annotations.push_back(edges_[i]);
  return report;
}

bool RuntimeGraph::eligible_for_selection(const std::string& id) const {
  const GraphNode& n = node(id);
  if (n.tau.lifecycle == LifecycleState::deprecated || n.tau.retired) return false;
  for (const GraphEdge* e : in_edges(id, Relation::supersedes)) {
    const GraphNode* successor = find(e->src);
    if (successor && (successor->tau.lifecycle == LifecycleState::trusted ||
                      successor->tau.lifecycle == LifecycleState::canonical)) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> RuntimeGraph::verify() const {
  std::vector<std::string> violations;
  for (const auto& [id, n] : nodes_) {
    if (id != n.node_id) violations.push_back("node key mismatch: " + id);
    if (n.tau.graph_version > version_) violations.push_back("node " + id + " newer than graph version");
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const GraphEdge& e = edges_[i];
    const std::string where = "edge " + std::to_string(i) + " (" + e.src + " " +
                              std::string(to_string(e.relation)) + " " + e.dst + ")";
    const GraphNode* s = find(e.src);
    const GraphNode* d = find(e.dst);
    if (!s || !d) {
      violations.push_back(where + ": dangling endpoint");
      continue;
    }
    if (e.src == e.dst) violations.push_back(where + ": self edge");
    if (!kind_allowed(e.relation, s->kind, d->kind)) violations.push_back(where + ": endpoint kinds");
  }
  for (Relation rel : {Relation::depends_on, Relation::supersedes, Relation::mutated_from}) {
    for (const GraphEdge& e : edges_) {
      if (e.relation != rel) continue;
      if (reaches(e.dst, e.src, rel)) {
        violations.push_back(std::string(to_string(rel)) + " cycle through " + e.src);
        break;
      }
    }
  }
  return violations;
}

RuntimeGraph RuntimeGraph::from_parts(std::uint64_t version, std::map<std::string, GraphNode> nodes,
                                      std::vector<GraphEdge> edges) {
  RuntimeGraph g;
  g.version_ = version;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  for (std::size_t i = 0; i < g.edges_.size(); ++i) g.index_edge(i);
  return g;
}

bool is_feasible_composition(const RuntimeGraph& graph, std::span<const std::string> chosen,
                             const std::set<std::string>& context) {
  if (chosen.empty()) return false;
  const std::set<std::string> in_set(chosen.begin(), chosen.end());
  for (const auto& s : chosen) {
    const GraphNode* n = graph.find(s);
    if (!n || n->kind != NodeKind::skill) return false;
    if (!has_validation(graph, s) || hits_context(graph, s, context)) return false;
    for (const GraphEdge* e : graph.out_edges(s, Relation::depends_on)) {
      if (!in_set.count(e->dst) && !is_canonical(graph, e->dst)) return false;
    }
  }
  return true;
}

CompositionProposal compose(const RuntimeGraph& graph, std::span<const std::string> skills,
                            const std::set<std::string>& context, const QualityWeights& w,
                            const QualityLookup& quality, ComposeOptions options) {
  w.validate();
  std::vector<std::string> ids(skills.begin(), skills.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) fail(ErrorCode::NotASkill, "empty skill set");
  if (ids.size() > options.max_skills) {
    fail(ErrorCode::TooManySkills, std::to_string(ids.size()) + " > " + std::to_string(options.max_skills));
  }
  for (const auto& id : ids) {
    const GraphNode* n = graph.find(id);
    if (!n) fail(ErrorCode::UnknownNode, id);
    if (n->kind != NodeKind::skill) fail(ErrorCode::NotASkill, id);
  }

  // Drop skills that can never be chosen, to a fixpoint: a skill whose
  // non-canonical dependency is itself unavailable is unavailable too.
  std::vector<std::string> cand;
  for (const auto& id : ids) {
    if (has_validation(graph, id) && !hits_context(graph, id, context)) cand.push_back(id);
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::set<std::string> avail(cand.begin(), cand.end());
    std::vector<std::string> next;
    for (const auto& id : cand) {
      bool ok = true;
      for (const GraphEdge* e : graph.out_edges(id, Relation::depends_on)) {
        if (!avail.count(e->dst) && !is_canonical(graph, e->dst)) ok = false;
      }
      if (ok) next.push_back(id);
    }
    changed = next.size() != cand.size();
    cand = std::move(next);
  }

  CompositionProposal best;
  if (cand.empty()) return best;

  const std::size_t n = cand.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto comps = quality(cand[i]);
    q[i] = comps ? quality_score(*comps, w) : 0.0;
  }
  // Dependencies on other candidates; canonical targets are already satisfied.
  std::vector<std::vector<std::size_t>> deps(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const GraphEdge* e : graph.out_edges(cand[i], Relation::depends_on)) {
      if (is_canonical(graph, e->dst)) continue;
      auto it = std::lower_bound(cand.begin(), cand.end(), e->dst);
      deps[i].push_back(static_cast<std::size_t>(it - cand.begin()));
    }
  }

  if (n <= options.exhaustive_limit) {
    std::vector<std::uint64_t> dep_mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d : deps[i]) dep_mask[i] |= std::uint64_t{1} << d;
    }
    bool found = false;
    std::vector<std::string> best_set;
    double best_sum = 0.0;
    const std::uint64_t limit = std::uint64_t{1} << n;
    for (std::uint64_t mask = 1; mask < limit; ++mask) {
      bool closed = true;
      double sum = 0.0;
      for (std::size_t i = 0; i < n && closed; ++i) {
        if (!(mask >> i & 1)) continue;
        closed = (mask & dep_mask[i]) == dep_mask[i];
        sum += q[i];
      }
      if (!closed) continue;
      std::vector<std::string> set;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) set.push_back(cand[i]);
      }
      if (!found || sum > best_sum || (sum == best_sum && set < best_set)) {
        found = true;
        best_sum = sum;
        best_set = std::move(set);
      }
    }
    best.skills = std::move(best_set);
    best.total_quality = best_sum;
    best.exhaustive = true;
    return best;
  }

  // Greedy: highest quality first, adding a skill once its dependencies are in.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
  std::vector<bool> chosen(n, false);
  bool any = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i : order) {
      if (chosen[i] || (any && q[i] <= 0.0)) continue;
      if (!std::all_of(deps[i].begin(), deps[i].end(), [&](std::size_t d) { return chosen[d]; })) continue;
      chosen[i] = true;
      any = changed = true;
    }
  }
  best.exhaustive = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!chosen[i]) continue;
    best.skills.push_back(cand[i]);
    best.total_quality += q[i];
  }
  return best;
}

}  // namespace govrt
