// Copyright 2026 The qruntime Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qrt/store/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "qrt/core/error.hpp"

namespace qrt {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

enum class Type { String, Integer, Number, Object, Array, Boolean };

struct Field {
  const char* name;
  Type type;
  bool required = true;
};

const std::map<std::string, std::vector<Field>>& event_schemas() {
  static const std::map<std::string, std::vector<Field>> schemas{
      {"job_submitted",
       {{"job_id", Type::String},
        {"user", Type::String},
        {"backend_id", Type::String},
        {"descriptor", Type::Object},
        {"required_stages", Type::Array},
        {"estimate_us", Type::Integer},
        {"seed", Type::Integer},
        {"idempotency_key", Type::String, false}}},
      {"job_transition",
       {{"job_id", Type::String},
        {"from", Type::String},
        {"to", Type::String},
        {"worker_id", Type::String, false},
        {"not_before", Type::String, false},
        {"failure", Type::Boolean, false},
        {"error", Type::Object, false},
        {"results", Type::Object, false},
        {"reason", Type::String, false}}},
      {"job_checkpoint", {{"job_id", Type::String}, {"checkpoint", Type::Object}, {"progress", Type::Object, false}}},
      {"worker_registered",
       {{"worker_id", Type::String},
        {"stages", Type::Array},
        {"backends", Type::Array},
        {"max_parallel", Type::Integer}}},
      {"worker_heartbeat", {{"worker_id", Type::String}}},
      {"reservation_created",
       {{"reservation_id", Type::String},
        {"backend_id", Type::String},
        {"user", Type::String},
        {"start", Type::String},
        {"duration_us", Type::Integer}}},
      {"session_opened",
       {{"session_id", Type::String}, {"user", Type::String}, {"backend_id", Type::String}, {"ttl_us", Type::Integer}}},
      {"session_closed", {{"session_id", Type::String}, {"reason", Type::String, false}}},
      {"calibration", {{"snapshot", Type::Object}}},
      {"duration_feedback",
       {{"backend_id", Type::String}, {"estimate_us", Type::Integer}, {"observed_us", Type::Integer}}},
  };
  return schemas;
}

bool has_type(const json& v, Type t) {
  switch (t) {
    case Type::String: return v.is_string();
    case Type::Integer: return v.is_number_integer();
    case Type::Number: return v.is_number();
    case Type::Object: return v.is_object();
    case Type::Array: return v.is_array();
    case Type::Boolean: return v.is_boolean();
  }
  return false;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::String: return "string";
    case Type::Integer: return "integer";
    case Type::Number: return "number";
    case Type::Object: return "object";
    case Type::Array: return "array";
    case Type::Boolean: return "boolean";
  }
  return "?";
}

std::string crc_hex(const std::string& text) {
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

constexpr std::string_view kCrcMarker = ",\"crc\":\"";

[[noreturn]] void storage_failure(const std::string& what, const std::filesystem::path& path) {
  throw Error(codes::kStorageFailure, what + " " + path.string() + ": " + std::strerror(errno),
              {{"path", path.string()}});
}

void write_all(int fd, const std::string& data, const std::filesystem::path& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_failure("write", path);
    }
    off += static_cast<std::size_t>(n);
  }
}

void sync_directory(const std::filesystem::path& file) {
  auto dir = file.parent_path();
  if (dir.empty()) dir = ".";
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

void validate_event(const std::string& kind, const json& payload) {
  const auto& schemas = event_schemas();
  auto it = schemas.find(kind);
  if (it == schemas.end()) throw Error(codes::kSchemaViolation, "unknown event kind '" + kind + "'", {{"kind", kind}});
  if (!payload.is_object()) {
    throw Error(codes::kSchemaViolation, kind + " payload must be an object", {{"kind", kind}});
  }
  for (const auto& f : it->second) {
    auto v = payload.find(f.name);
    if (v == payload.end()) {
      if (!f.required) continue;
      throw Error(codes::kSchemaViolation, kind + " payload is missing '" + f.name + "'",
                  {{"kind", kind}, {"field", f.name}});
    }
    if (!has_type(*v, f.type)) {
      throw Error(codes::kSchemaViolation, kind + "." + f.name + " must be " + type_name(f.type),
                  {{"kind", kind}, {"field", f.name}});
    }
  }
}

std::string encode_event_line(const Event& event) {
  ordered line;
  line["seq"] = event.seq;
  line["ts"] = to_iso8601(event.timestamp);
  line["kind"] = event.kind;
  line["payload"] = ordered::parse(event.payload.dump());
  std::string body = line.dump();
  const std::string crc = crc_hex(body);
  body.pop_back();
  body += kCrcMarker;
  body += crc;
  body += "\"}";
  return body;
}

Event decode_event_line(const std::string& line) {
  const auto pos = line.rfind(kCrcMarker);
  if (pos == std::string::npos || line.size() != pos + kCrcMarker.size() + 10 || line.substr(line.size() - 2) != "\"}") {
    throw Error(codes::kCorruptLog, "record has no checksum");
  }
  const std::string stored = line.substr(pos + kCrcMarker.size(), 8);
  const std::string body = line.substr(0, pos) + "}";
  if (crc_hex(body) != stored) throw Error(codes::kCorruptLog, "checksum mismatch");
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(codes::kCorruptLog, std::string("unparseable record: ") + e.what());
  }
  Event ev;
  try {
    ev.seq = j.at("seq").get<std::int64_t>();
    ev.timestamp = parse_iso8601(j.at("ts").get<std::string>());
    ev.kind = j.at("kind").get<std::string>();
    ev.payload = j.at("payload");
  } catch (const json::exception& e) {
    throw Error(codes::kCorruptLog, std::string("malformed record: ") + e.what());
  }
  return ev;
}

EventLog::EventLog(Options options) : options_(std::move(options)) {
  if (options_.snapshot_path.empty()) options_.snapshot_path = options_.path.string() + ".snapshot";
  if (options_.path.has_parent_path()) std::filesystem::create_directories(options_.path.parent_path());
  recovery_ = scan(1, &valid_bytes_);
  last_seq_ = recovery_.last_valid_seq;
  recovery_.events.clear();
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

ReplayReport EventLog::scan(std::int64_t from_seq, std::uintmax_t* valid_bytes) const {
  ReplayReport report;
  std::uintmax_t offset = 0;
  std::ifstream in(options_.path, std::ios::binary);
  if (!in) {
    if (valid_bytes) *valid_bytes = 0;
    return report;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();
  std::int64_t line_no = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    ++line_no;
    const auto nl = data.find('\n', start);
    auto fail = [&](std::string reason) {
      report.truncated = true;
      report.corrupt_line = line_no;
      report.reason = std::move(reason);
    };
    if (nl == std::string::npos) {
      fail("incomplete final record");
      break;
    }
    const std::string line = data.substr(start, nl - start);
    Event ev;
    try {
      ev = decode_event_line(line);
    } catch (const Error& e) {
      fail(e.what());
      break;
    }
    if (ev.seq != report.last_valid_seq + 1) {
      fail("sequence gap: expected " + std::to_string(report.last_valid_seq + 1) + ", found " +
           std::to_string(ev.seq));
      break;
    }
    report.last_valid_seq = ev.seq;
    if (ev.seq >= from_seq) report.events.push_back(std::move(ev));
    start = nl + 1;
    offset = start;
  }
  if (valid_bytes) *valid_bytes = offset;
  return report;
}

ReplayReport EventLog::replay(std::int64_t from_seq) const { return scan(from_seq, nullptr); }

void EventLog::open_for_append() {
  fd_ = ::open(options_.path.c_str(), O_WRONLY | O_CREAT, 0644);
  if (fd_ < 0) storage_failure("cannot open", options_.path);
  // Drop whatever followed the last valid record so new appends continue
  // the valid prefix.
  if (::ftruncate(fd_, static_cast<off_t>(valid_bytes_)) != 0) storage_failure("cannot truncate", options_.path);
  if (::lseek(fd_, 0, SEEK_END) < 0) storage_failure("cannot seek", options_.path);
  if (options_.fsync) ::fsync(fd_);
}

std::int64_t EventLog::append(const std::string& kind, json payload, Timestamp timestamp) {
  validate_event(kind, payload);
  if (fd_ < 0) open_for_append();
  Event ev;
  ev.seq = last_seq_ + 1;
  ev.timestamp = timestamp;
  ev.kind = kind;
  ev.payload = std::move(payload);
  const std::string line = encode_event_line(ev) + "\n";
  write_all(fd_, line, options_.path);
  if (options_.fsync && ::fdatasync(fd_) != 0) storage_failure("cannot sync", options_.path);
  last_seq_ = ev.seq;
  valid_bytes_ += line.size();
  return ev.seq;
}

void EventLog::write_snapshot(std::int64_t seq, const json& state) {
  const auto tmp = options_.snapshot_path.string() + ".tmp";
  json doc{{"seq", seq}, {"state", state}};
  std::string body = doc.dump();
  const std::string text = json{{"crc", crc_hex(body)}, {"body", body}}.dump() + "\n";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) storage_failure("cannot open", tmp);
  try {
    write_all(fd, text, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (options_.fsync) ::fsync(fd);
  ::close(fd);
  if (std::rename(tmp.c_str(), options_.snapshot_path.c_str()) != 0) storage_failure("cannot rename", tmp);
  if (options_.fsync) sync_directory(options_.snapshot_path);
}

std::optional<std::pair<std::int64_t, json>> EventLog::load_snapshot() const {
  std::ifstream in(options_.snapshot_path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json outer = json::parse(in);
    const std::string body = outer.at("body").get<std::string>();
    if (crc_hex(body) != outer.at("crc").get<std::string>()) return std::nullopt;
    json doc = json::parse(body);
    return std::make_pair(doc.at("seq").get<std::int64_t>(), std::move(doc.at("state")));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

Recovered recover(const EventLog& log, const std::function<void(const json&)>& load,
                  const std::function<void(const Event&)>& apply) {
  Recovered out;
  auto report = log.replay(1);
  out.truncated = report.truncated;
  out.reason = report.reason;
  out.last_seq = report.last_valid_seq;
  if (auto snap = log.load_snapshot(); snap && snap->first <= report.last_valid_seq) {
    load(snap->second);
    out.snapshot_seq = snap->first;
  }
  for (const auto& ev : report.events) {
    if (ev.seq > out.snapshot_seq) apply(ev);
  }
  return out;
}

}  // namespace qrt
