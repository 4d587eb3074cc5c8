#include "govrt/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace govrt {
namespace fs = std::filesystem;

namespace {

std::string errno_text() { return std::strerror(errno); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::StorageFailure, "write " + path.string() + ": " + errno_text());
    }
    done += static_cast<std::size_t>(n);
  }
}

// Writes a whole file through a temporary and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::StorageFailure, "open " + tmp.string() + ": " + errno_text());
  try {
    write_all(fd, data, tmp);
    if (::fsync(fd) != 0) fail(ErrorCode::StorageFailure, "fsync " + tmp.string() + ": " + errno_text());
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::StorageFailure, "rename " + path.string() + ": " + ec.message());
}

std::string snapshot_name(std::uint64_t as_of) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08llu.snap", static_cast<unsigned long long>(as_of));
  return buf;
}

}  // namespace

Store::Store(fs::path root, Mode mode) : root_(std::move(root)), mode_(mode) {
  if (mode_ == Mode::read_only) {
    if (!fs::is_directory(root_)) fail(ErrorCode::StorageFailure, "no store at " + root_.string());
    return;
  }
  std::error_code ec;
  fs::create_directories(root_ / "snapshots", ec);
  if (ec) fail(ErrorCode::StorageFailure, "create " + root_.string() + ": " + ec.message());
  lock_fd_ = ::open((root_ / "lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) fail(ErrorCode::StorageFailure, "open lock: " + errno_text());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    fail(ErrorCode::StoreLocked, "another writer holds " + (root_ / "lock").string());
  }
  // Cut an unacknowledged trailing fragment left by a crash mid-append.
  const std::string text = read_file(audit_log());
  const auto last_newline = text.rfind('\n');
  const std::size_t committed = last_newline == std::string::npos ? 0 : last_newline + 1;
  if (committed != text.size()) fs::resize_file(audit_log(), committed);
}

Store::Store(Store&& other) noexcept
    : root_(std::move(other.root_)), mode_(other.mode_), lock_fd_(other.lock_fd_), fail_next_(other.fail_next_) {
  other.lock_fd_ = -1;
}

Store::~Store() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::vector<std::string> Store::read_lines() const {
  const std::string text = read_file(audit_log());
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;
    lines.emplace_back(text, start, nl - start);
    start = nl + 1;
  }
  return lines;
}

void Store::append(std::span<const TraceEvent> events) {
  if (!writable()) fail(ErrorCode::StorageFailure, "store opened read-only");
  if (events.empty()) return;
  std::string data;
  for (const auto& e : events) {
    data += encode_line(e);
    data += '\n';
  }
  const fs::path path = audit_log();
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::StorageFailure, "open " + path.string() + ": " + errno_text());
  const off_t before = ::lseek(fd, 0, SEEK_END);
  try {
    if (fail_next_) {
      fail_next_ = false;
      // Leave a torn fragment behind so the cleanup path is exercised too.
      write_all(fd, data.substr(0, data.size() / 2), path);
      errno = EIO;
      fail(ErrorCode::StorageFailure, "write " + path.string() + ": injected failure");
    }
    write_all(fd, data, path);
    if (::fsync(fd) != 0) fail(ErrorCode::StorageFailure, "fsync " + path.string() + ": " + errno_text());
  } catch (...) {
    if (before >= 0 && ::ftruncate(fd, before) == 0) ::fsync(fd);
    ::close(fd);
    throw;
  }
  ::close(fd);
}

std::string snapshot_text(const KernelState& state) {
  Json body{{"as_of_event", state.next_event == 0 ? 0 : state.next_event - 1},
            {"graph_version", state.graph.version()},
            {"head_hash", state.harness.log_head},
            {"state", state_to_json(state)}};
  body["checksum"] = to_hex(sha256(canonical_serialize(body)));
  return canonical_serialize(body);
}

KernelState parse_snapshot(std::string_view text) {
  Json body = parse_json(text);
  const auto checksum = get_field<std::string>(body, "checksum");
  body.erase("checksum");
  if (to_hex(sha256(canonical_serialize(body))) != checksum) fail(ErrorCode::ChainBroken, "snapshot checksum mismatch");
  return state_from_json(require_field(body, "state"));
}

void Store::write_snapshot(const KernelState& state) {
  if (!writable() || state.next_event == 0) return;
  write_file_atomic(snapshots_dir() / snapshot_name(state.next_event - 1), snapshot_text(state) + "\n");
}

std::optional<KernelState> Store::load_snapshot(const EventLog& log) const {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(snapshots_dir(), ec)) {
    if (entry.path().extension() == ".snap") files.push_back(entry.path());
  }
  std::sort(files.rbegin(), files.rend());
  for (const auto& path : files) {
    try {
      KernelState s = parse_snapshot(read_file(path));
      if (s.next_event == 0 || s.next_event > log.size()) continue;
      if (to_hex(log.at(s.next_event - 1).this_hash) != s.harness.log_head) continue;
      return s;
    } catch (const KernelError&) {
      continue;  // a damaged snapshot only costs replay time
    }
  }
  return std::nullopt;
}

}  // namespace govrt
