#pragma once

// TraceEvent and the in-memory hash chain. One event is one canonical JSON
// line in store/audit.log.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "govrt/canonical.hpp"
#include "govrt/digest.hpp"
#include "govrt/enum_names.hpp"

namespace govrt {

enum class EventKind {
  artifact_registered,
  lifecycle_transition,
  mutation_proposed,
  mutation_staged,
  mutation_applied,
  mutation_rejected,
  rollback_event,
  review_recorded,
  graph_updated,
  evaluation_recorded,
  cycle_started,
  cycle_completed,
};

template <>
struct EnumNames<EventKind> {
  static constexpr std::array<std::pair<EventKind, std::string_view>, 12> table{{
      {EventKind::artifact_registered, "artifact_registered"},
      {EventKind::lifecycle_transition, "lifecycle_transition"},
      {EventKind::mutation_proposed, "mutation_proposed"},
      {EventKind::mutation_staged, "mutation_staged"},
      {EventKind::mutation_applied, "mutation_applied"},
      {EventKind::mutation_rejected, "mutation_rejected"},
      {EventKind::rollback_event, "rollback_event"},
      {EventKind::review_recorded, "review_recorded"},
      {EventKind::graph_updated, "graph_updated"},
      {EventKind::evaluation_recorded, "evaluation_recorded"},
      {EventKind::cycle_started, "cycle_started"},
      {EventKind::cycle_completed, "cycle_completed"},
  }};
};

struct TraceEvent {
  std::uint64_t index = 0;
  EventKind kind = EventKind::artifact_registered;
  std::string actor;
  std::uint64_t tick = 0;
  Json payload;
  Digest prev_hash{};
  Digest this_hash{};

  std::string id() const;
  bool operator==(const TraceEvent&) const = default;
};

/// "ev-000042". Only this exact form parses back.
std::string event_id(std::uint64_t index);
std::optional<std::uint64_t> parse_event_id(std::string_view id);

/// SHA-256(prev_hash || canonical {actor, index, kind, payload, tick}).
Digest compute_event_hash(const Digest& prev, std::uint64_t index, EventKind kind, const std::string& actor,
                          std::uint64_t tick, const Json& payload);

/// Canonical line without the trailing newline.
std::string encode_line(const TraceEvent& event);
/// Throws InvalidRecord on malformed lines, UnknownEventKind on unknown kinds.
TraceEvent decode_line(std::string_view line);

struct ChainViolation {
  std::uint64_t index = 0;
  std::string reason;

  bool operator==(const ChainViolation&) const = default;
};

/// At most one violation per index. Events after a broken one are judged
/// against the hashes they claim, so a single tamper reports a single index.
std::vector<ChainViolation> verify_chain(std::span<const TraceEvent> events);
/// Same check over raw lines, which also catches non-canonical encodings.
std::vector<ChainViolation> verify_lines(std::span<const std::string> lines);

/// Append-only chain held in memory; the store mirrors it on disk.
class EventLog {
 public:
  const TraceEvent& append(EventKind kind, std::string actor, std::uint64_t tick, Json payload);
  /// Adopts an already-hashed event (loading); throws ChainBroken if it does not link.
  void adopt(TraceEvent event);
  /// Drops events from `size` on; used to abort a command.
  void truncate(std::size_t size);

  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  const TraceEvent& at(std::size_t i) const { return events_.at(i); }
  const std::vector<TraceEvent>& events() const noexcept { return events_; }
  Digest head() const noexcept { return events_.empty() ? kZeroDigest : events_.back().this_hash; }

 private:
  std::vector<TraceEvent> events_;
};

}  // namespace govrt
