#pragma once

// On-disk layout:
//   <root>/audit.log                one canonical event per line
//   <root>/snapshots/NNNNNNNN.snap  state as of event NNNNNNNN
//   <root>/policy                   active governance policy (TOML)
//   <root>/lock                     held (flock) by the single writer

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "govrt/event.hpp"
#include "govrt/state.hpp"

namespace govrt {

class Store {
 public:
  enum class Mode { read_only, read_write };

  /// read_write creates the layout and takes the lock (StoreLocked when held).
  /// read_only requires an existing directory and never writes.
  Store(std::filesystem::path root, Mode mode);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  Store(Store&& other) noexcept;
  Store& operator=(Store&&) = delete;

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path audit_log() const { return root_ / "audit.log"; }
  std::filesystem::path snapshots_dir() const { return root_ / "snapshots"; }
  std::filesystem::path policy_file() const { return root_ / "policy"; }
  bool writable() const noexcept { return mode_ == Mode::read_write; }

  /// Complete lines of the log. A trailing fragment without newline is an
  /// unacknowledged write: ignored here and cut off when opened for writing.
  std::vector<std::string> read_lines() const;

  /// Appends and fsyncs. On failure the file is cut back and StorageFailure thrown.
  void append(std::span<const TraceEvent> events);

  void write_snapshot(const KernelState& state);
  /// Newest snapshot whose checksum holds and whose head matches `log`.
  std::optional<KernelState> load_snapshot(const EventLog& log) const;

  /// Test hook: the next append fails as if the disk refused the write.
  void fail_next_append() { fail_next_ = true; }

 private:
  std::filesystem::path root_;
  Mode mode_;
  int lock_fd_ = -1;
  bool fail_next_ = false;
};

/// Canonical snapshot text for `state`; also used to compare states.
std::string snapshot_text(const KernelState& state);
/// Parses and checks a snapshot; throws ChainBroken on a bad checksum.
KernelState parse_snapshot(std::string_view text);

}  // namespace govrt
