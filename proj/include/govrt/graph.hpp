#pragma once

// Knowledge-grounded runtime graph: typed nodes carrying (content, quality,
// temporal/lifecycle metadata, lineage) and typed edges from a closed
// relation set. The graph object itself only stores and checks; kernel
// commands decide what to insert and record the events.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "govrt/enum_names.hpp"
#include "govrt/lifecycle.hpp"
#include "govrt/registry.hpp"

namespace govrt {

enum class NodeKind { skill, capability, evaluator, benchmark, config, mutation, trace, context };

template <>
struct EnumNames<NodeKind> {
  static constexpr std::array<std::pair<NodeKind, std::string_view>, 8> table{{
      {NodeKind::skill, "skill"},
      {NodeKind::capability, "capability"},
      {NodeKind::evaluator, "evaluator"},
      {NodeKind::benchmark, "benchmark"},
      {NodeKind::config, "config"},
      {NodeKind::mutation, "mutation"},
      {NodeKind::trace, "trace"},
      {NodeKind::context, "context"},
  }};
};

enum class Relation {
  depends_on,
  generated_by,
  validated_by,
  improves,
  supersedes,
  mutated_from,
  composed_with,
  fails_under,
};

template <>
struct EnumNames<Relation> {
  static constexpr std::array<std::pair<Relation, std::string_view>, 8> table{{
      {Relation::depends_on, "depends_on"},
      {Relation::generated_by, "generated_by"},
      {Relation::validated_by, "validated_by"},
      {Relation::improves, "improves"},
      {Relation::supersedes, "supersedes"},
      {Relation::mutated_from, "mutated_from"},
      {Relation::composed_with, "composed_with"},
      {Relation::fails_under, "fails_under"},
  }};
};

/// Node kind a capability record is filed under.
NodeKind node_kind_for(CapabilityKind kind);
/// Kinds backed by a CapabilityRecord.
bool is_capability_node(NodeKind kind);
/// Relations whose subgraph must stay acyclic.
bool is_acyclic_relation(Relation rel);
/// Endpoint-kind table for every relation.
bool kind_allowed(Relation rel, NodeKind src, NodeKind dst);

struct Temporal {
  std::uint64_t created_tick = 0;
  std::optional<LifecycleState> lifecycle;  // capability nodes only
  std::uint64_t graph_version = 0;          // graph version right after insertion
  bool retired = false;                     // rolled-back configs

  bool operator==(const Temporal&) const = default;
};

struct GraphNode {
  std::string node_id;
  NodeKind kind = NodeKind::capability;
  std::string content_hash;           // c
  std::optional<double> q;            // cached quality score
  Temporal tau;                       // temporal + lifecycle metadata
  std::vector<std::string> lineage;   // direct generated_by / mutated_from parents
  std::optional<std::string> tag;     // context tag for context nodes

  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::string src;
  Relation relation = Relation::depends_on;
  std::string dst;
  std::string recorded_by;  // TraceEvent id

  bool operator==(const GraphEdge&) const = default;
};

struct QualityWeights {
  double omega_p = 1.0;
  double omega_r = 1.0;
  double omega_s = 1.0;
  double omega_u = 1.0;
  double omega_rho = 1.0;

  void validate() const;  // InvalidWeights
  bool operator==(const QualityWeights&) const = default;
};

/// q = wp*p + wr*r + ws*s + wu*u - wrho*rho
double quality_score(const QualityComponents& c, const QualityWeights& w);

struct LineageEntry {
  std::string node_id;
  std::size_t depth = 0;
  std::optional<std::string> parent;  // node that led here
  std::optional<Relation> via;

  bool operator==(const LineageEntry&) const = default;
};

struct LineageReport {
  std::vector<LineageEntry> ancestry;  // breadth-first, self first
  // validated_by / fails_under / depends_on / improves / composed_with edges
  // touching any ancestry node, in insertion order.
  std::vector<GraphEdge> annotations;

  bool contains(const std::string& node_id) const;
  bool has_relation(Relation rel) const;
};

class RuntimeGraph {
 public:
  std::uint64_t version() const noexcept { return version_; }
  const GraphNode* find(const std::string& id) const;
  const GraphNode& node(const std::string& id) const;  // UnknownNode
  const std::map<std::string, GraphNode>& nodes() const noexcept { return nodes_; }
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  std::vector<const GraphEdge*> out_edges(const std::string& id, std::optional<Relation> rel = std::nullopt) const;
  std::vector<const GraphEdge*> in_edges(const std::string& id, std::optional<Relation> rel = std::nullopt) const;

  /// composed_with is symmetric and stored with ordered endpoints.
  static GraphEdge normalize(GraphEdge edge);

  /// Everything add_edge checks, in order: UnknownNode, SelfEdge,
  /// KindMismatch, DuplicateEdge, CycleViolation. Throws on the first failure.
  void check_edge(const std::string& src, Relation rel, const std::string& dst) const;
  bool has_edge(const std::string& src, Relation rel, const std::string& dst) const;
  /// Path from `from` to `to` following `rel` edges forward (from == to counts).
  bool reaches(const std::string& from, const std::string& to, Relation rel) const;

  // Mutators used by the event reducer; inputs were checked when the event
  // was created.
  void insert_node(GraphNode node);
  void insert_edge(GraphEdge edge);
  void set_quality(const std::string& id, double q);
  void set_lifecycle(const std::string& id, LifecycleState state);
  void set_retired(const std::string& id);

  /// Ancestors through generated_by, mutated_from and supersedes edges.
  LineageReport lineage(const std::string& id) const;

  /// Not deprecated, not retired, and not superseded by a trusted or
  /// canonical successor.
  bool eligible_for_selection(const std::string& id) const;

  /// Structural invariant scan; empty when sound.
  std::vector<std::string> verify() const;

  bool operator==(const RuntimeGraph& other) const {
    return version_ == other.version_ && nodes_ == other.nodes_ && edges_ == other.edges_;
  }

  // Serialization needs raw access; adjacency is rebuilt on load.
  static RuntimeGraph from_parts(std::uint64_t version, std::map<std::string, GraphNode> nodes,
                                 std::vector<GraphEdge> edges);

 private:
  void index_edge(std::size_t i);

  std::uint64_t version_ = 0;
  std::map<std::string, GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<std::string, std::vector<std::size_t>> out_;
  std::unordered_map<std::string, std::vector<std::size_t>> in_;
};

struct ComposeOptions {
  std::size_t exhaustive_limit = 12;  // exact subset search up to this many candidates
  std::size_t max_skills = 64;        // TooManySkills beyond this
};

struct CompositionProposal {
  std::vector<std::string> skills;  // sorted; empty when nothing is feasible
  double total_quality = 0.0;
  bool exhaustive = true;

  bool operator==(const CompositionProposal&) const = default;
};

using QualityLookup = std::function<std::optional<QualityComponents>(const std::string&)>;

/// Best feasible non-empty subset by summed quality. Feasible means: every
/// depends_on target is chosen or canonical, no fails_under edge hits a
/// context tag, and every chosen skill has a validated_by edge.
CompositionProposal compose(const RuntimeGraph& graph, std::span<const std::string> skills,
                            const std::set<std::string>& context, const QualityWeights& w,
                            const QualityLookup& quality, ComposeOptions options = {});

/// Re-checks the three feasibility rules for a chosen set.
bool is_feasible_composition(const RuntimeGraph& graph, std::span<const std::string> chosen,
                             const std::set<std::string>& context);

}  // namespace govrt
