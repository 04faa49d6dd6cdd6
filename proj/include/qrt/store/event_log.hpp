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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/core/time.hpp"

namespace qrt {

struct Event {
  std::int64_t seq = 0;
  Timestamp timestamp{};
  std::string kind;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const Event&) const = default;
};

/// Throws SCHEMA_VIOLATION when `payload` does not fit the kind's schema or
/// the kind is unknown.
void validate_event(const std::string& kind, const nlohmann::json& payload);

/// One line of the log: seq first, CRC-32 of the rest of the line last.
[[nodiscard]] std::string encode_event_line(const Event& event);
/// Throws CORRUPT_LOG when the CRC or the JSON does not check out.
[[nodiscard]] Event decode_event_line(const std::string& line);

struct ReplayReport {
  std::vector<Event> events;
  std::int64_t last_valid_seq = 0;
  bool truncated = false;
  /// 1-based line number of the first bad record, when truncated.
  std::int64_t corrupt_line = 0;
  std::string reason;
};

/// Append-only JSON-lines event log plus a sidecar snapshot file. Single
/// writer; appends are durable (fsync) before they return unless disabled.
class EventLog {
 public:
  struct Options {
    std::filesystem::path path;
    /// Defaults to `path` + ".snapshot".
    std::filesystem::path snapshot_path;
    bool fsync = true;
  };

  /// Opens (creating if absent) and scans the log. A corrupt tail is
  /// reported by `recovery()` and cut off before the next append.
  explicit EventLog(Options options);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Validates, assigns seq = last + 1, writes, syncs. Throws
  /// SCHEMA_VIOLATION or STORAGE_FAILURE.
  std::int64_t append(const std::string& kind, nlohmann::json payload, Timestamp timestamp);

  /// Valid events with seq >= from_seq, stopping at the first bad record.
  [[nodiscard]] ReplayReport replay(std::int64_t from_seq = 1) const;
  /// What the scan at open time found.
  [[nodiscard]] const ReplayReport& recovery() const { return recovery_; }
  [[nodiscard]] std::int64_t last_seq() const { return last_seq_; }

  /// Writes {"seq": seq, "state": state} atomically (tmp file + rename).
  void write_snapshot(std::int64_t seq, const nlohmann::json& state);
  /// The stored snapshot, or nullopt when none exists or it is unreadable.
  [[nodiscard]] std::optional<std::pair<std::int64_t, nlohmann::json>> load_snapshot() const;

  [[nodiscard]] const std::filesystem::path& path() const { return options_.path; }

 private:
  ReplayReport scan(std::int64_t from_seq, std::uintmax_t* valid_bytes) const;
  void open_for_append();

  Options options_;
  int fd_ = -1;
  std::int64_t last_seq_ = 0;
  std::uintmax_t valid_bytes_ = 0;
  ReplayReport recovery_;
};

/// Rebuilds state from an optional snapshot plus the log suffix. `load`
/// replaces the state from a snapshot body, `apply` folds one event.
struct Recovered {
  std::int64_t snapshot_seq = 0;
  std::int64_t last_seq = 0;
  bool truncated = false;
  std::string reason;
};

Recovered recover(const EventLog& log, const std::function<void(const nlohmann::json&)>& load,
                  const std::function<void(const Event&)>& apply);

}  // namespace qrt
