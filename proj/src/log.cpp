// log.cpp

#include "lrc/log.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>

#include "lrc/core.hpp"

namespace lrc {

namespace {

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
  }
  return "info";
}

std::string utc_timestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t secs = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];  // sized for any int fields, which keeps -Wformat-truncation quiet
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string quote_if_needed(const std::string& v) {
  if (!v.empty() && v.find_first_of(" \t\"=\\\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace

RunLog::RunLog(const std::filesystem::path& path, bool echo_to_stderr) : path_(path), echo_(echo_to_stderr) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorCode::Io, "cannot open run log " + path.string());
}

void RunLog::event(LogLevel level, const std::string& stage, const std::string& event, const LogFields& fields) {
  std::string line = utc_timestamp() + " level=" + level_name(level) + " stage=" + quote_if_needed(stage) +
                     " event=" + quote_if_needed(event);
  if (!fields.empty()) line += " " + format_fields(fields);
  std::lock_guard lock(mu_);
  if (echo_) std::cerr << line << '\n';
  if (!path_) return;
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::Io, "write to run log " + path_->string() + " failed");
}

std::string format_fields(const LogFields& fields) {
  std::string out;
  for (const auto& [key, value] : fields) {
    if (!out.empty()) out += ' ';
    out += key + "=" + quote_if_needed(value);
  }
  return out;
}

std::optional<LogRecord> parse_log_line(const std::string& line) {
  const auto space = line.find(' ');
  if (space == std::string::npos) return std::nullopt;
  LogRecord rec;
  rec.timestamp = line.substr(0, space);
  std::size_t i = space + 1;
  while (i < line.size()) {
    const auto eq = line.find('=', i);
    if (eq == std::string::npos) return std::nullopt;
    std::string key = line.substr(i, eq - i);
    std::string value;
    i = eq + 1;
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        const char c = line[i++];
        if (c == '\\' && i < line.size()) {
          const char e = line[i++];
          value += e == 'n' ? '\n' : e;
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          value += c;
        }
      }
      if (!closed) return std::nullopt;
    } else {
      const auto end = line.find(' ', i);
      value = line.substr(i, end == std::string::npos ? std::string::npos : end - i);
      i = end == std::string::npos ? line.size() : end;
    }
    rec.fields[std::move(key)] = std::move(value);
    while (i < line.size() && line[i] == ' ') ++i;
  }
  return rec;
}

std::vector<LogRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open run log " + path.string());
  std::vector<LogRecord> out;
  for (std::string line; std::getline(in, line);) {
    if (auto rec = parse_log_line(line)) out.push_back(std::move(*rec));
  }
  return out;
}

}  // namespace lrc
