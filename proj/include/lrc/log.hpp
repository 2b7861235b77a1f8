// log.hpp
// Append-only structured run log. One line per event:
//
//   2026-10-15T09:12:44.120Z level=info stage=S2 event=stage_complete in=12 out=3 ...
//
// Values containing spaces, quotes or '=' are double-quoted with backslash
// escapes. A write failure throws Error(Io).

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lrc {

enum class LogLevel { Debug, Info, Warn, Error };

using LogFields = std::vector<std::pair<std::string, std::string>>;

class RunLog {
 public:
  /// A log that discards events.
  RunLog() = default;
  explicit RunLog(const std::filesystem::path& path, bool echo_to_stderr = false);

  void event(LogLevel level, const std::string& stage, const std::string& event, const LogFields& fields = {});
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
  bool echo_ = false;
  std::mutex mu_;
};

struct LogRecord {
  std::string timestamp;
  std::map<std::string, std::string> fields;  // includes level, stage, event
};

/// Parses "<head> key=value ...". The head token (a timestamp in run logs) is
/// returned in LogRecord::timestamp.
std::optional<LogRecord> parse_log_line(const std::string& line);

/// Renders fields as space-separated key=value pairs, quoting where needed.
std::string format_fields(const LogFields& fields);
std::vector<LogRecord> read_log(const std::filesystem::path& path);

}  // namespace lrc
