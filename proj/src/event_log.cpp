#include "govrt/event.hpp"

#include <charconv>
#include <cstdio>

namespace govrt {

namespace {

Json hashed_body(std::uint64_t index, EventKind kind, const std::string& actor, std::uint64_t tick,
                 const Json& payload) {
  return Json{{"actor", actor}, {"index", index}, {"kind", to_string(kind)}, {"payload", payload}, {"tick", tick}};
}

}  // namespace

std::string TraceEvent::id() const { return event_id(index); }

std::string event_id(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ev-%06llu", static_cast<unsigned long long>(index));
  return buf;
}

std::optional<std::uint64_t> parse_event_id(std::string_view id) {
  if (id.size() < 9 || id.substr(0, 3) != "ev-") return std::nullopt;
  std::string_view digits = id.substr(3);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  if (event_id(value) != id) return std::nullopt;
  return value;
}

Digest compute_event_hash(const Digest& prev, std::uint64_t index, EventKind kind, const std::string& actor,
                          std::uint64_t tick, const Json& payload) {
  return sha256(std::span<const std::uint8_t>(prev),
                canonical_serialize(hashed_body(index, kind, actor, tick, payload)));
}

std::string encode_line(const TraceEvent& e) {
  Json j = hashed_body(e.index, e.kind, e.actor, e.tick, e.payload);
  j["prev_hash"] = to_hex(e.prev_hash);
  j["this_hash"] = to_hex(e.this_hash);
  return canonical_serialize(j);
}

TraceEvent decode_line(std::string_view line) {
  Json j = parse_json(line);
  if (!j.is_object()) fail(ErrorCode::InvalidRecord, "event line is not an object");
  TraceEvent e;
  e.index = get_field<std::uint64_t>(j, "index");
  const auto kind_name = get_field<std::string>(j, "kind");
  auto kind = parse_enum<EventKind>(kind_name);
  if (!kind) fail(ErrorCode::UnknownEventKind, "event " + std::to_string(e.index) + " has kind '" + kind_name + "'");
  e.kind = *kind;
  e.actor = get_field<std::string>(j, "actor");
  e.tick = get_field<std::uint64_t>(j, "tick");
  e.payload = require_field(j, "payload");
  auto prev = digest_from_hex(get_field<std::string>(j, "prev_hash"));
  auto self = digest_from_hex(get_field<std::string>(j, "this_hash"));
  if (!prev || !self) fail(ErrorCode::InvalidRecord, "event " + std::to_string(e.index) + " has a malformed hash");
  e.prev_hash = *prev;
  e.this_hash = *self;
  if (j.size() != 7) fail(ErrorCode::InvalidRecord, "event " + std::to_string(e.index) + " has unexpected fields");
  return e;
}

namespace {

// Checks one decoded event at position `i`; `prev_ok` says whether the
// previous position was clean, in which case the link is checked too.
std::optional<std::string> check_event(const TraceEvent& e, std::uint64_t i, const TraceEvent* prev, bool prev_ok) {
  if (e.index != i) return "index " + std::to_string(e.index) + " at position " + std::to_string(i);
  if (compute_event_hash(e.prev_hash, e.index, e.kind, e.actor, e.tick, e.payload) != e.this_hash) {
    return "hash mismatch";
  }
  if (i == 0 && e.prev_hash != kZeroDigest) return "genesis prev_hash is not zero";
  if (prev && prev_ok && e.prev_hash != prev->this_hash) return "prev_hash does not link to event " + std::to_string(i - 1);
  return std::nullopt;
}

}  // namespace

std::vector<ChainViolation> verify_chain(std::span<const TraceEvent> events) {
  std::vector<ChainViolation> out;
  bool prev_ok = true;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto problem = check_event(events[i], i, i ? &events[i - 1] : nullptr, prev_ok);
    prev_ok = !problem;
    if (problem) out.push_back({i, *problem});
  }
  return out;
}

std::vector<ChainViolation> verify_lines(std::span<const std::string> lines) {
  std::vector<ChainViolation> out;
  std::optional<TraceEvent> prev;
  bool prev_ok = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::optional<std::string> problem;
    std::optional<TraceEvent> e;
    try {
      e = decode_line(lines[i]);
      if (encode_line(*e) != lines[i]) problem = "line is not in canonical form";
    } catch (const KernelError& err) {
      problem = std::string("unreadable: ") + err.what();
    }
    if (!problem) problem = check_event(*e, i, prev ? &*prev : nullptr, prev_ok);
    prev_ok = !problem;
    if (problem) out.push_back({i, *problem});
    prev = std::move(e);
  }
  return out;
}

const TraceEvent& EventLog::append(EventKind kind, std::string actor, std::uint64_t tick, Json payload) {
  TraceEvent e;
  e.index = events_.size();
  e.kind = kind;
  e.actor = std::move(actor);
  e.tick = tick;
  e.payload = std::move(payload);
  e.prev_hash = head();
  e.this_hash = compute_event_hash(e.prev_hash, e.index, e.kind, e.actor, e.tick, e.payload);
  events_.push_back(std::move(e));
  return events_.back();
}

void EventLog::adopt(TraceEvent event) {
  if (event.index != events_.size() || event.prev_hash != head() ||
      compute_event_hash(event.prev_hash, event.index, event.kind, event.actor, event.tick, event.payload) !=
          event.this_hash) {
    fail(ErrorCode::ChainBroken, "event " + std::to_string(event.index) + " does not extend the chain");
  }
  events_.push_back(std::move(event));
}

void EventLog::truncate(std::size_t size) {
  if (size < events_.size()) events_.resize(size);
}

}  // namespace govrt
