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

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "qrt/backend/adapter.hpp"
#include "qrt/calibration/snapshot.hpp"
#include "qrt/core/time.hpp"

namespace qrt {

inline constexpr Duration kDefaultPollInterval = std::chrono::seconds(60);
inline constexpr std::size_t kDefaultHistoryRetention = 1000;

/// Fetches, stamps, keeps and serves calibration snapshots per backend.
/// Reads run concurrently; polls of one backend are serialized.
class CalibrationManager {
 public:
  /// Called with every accepted snapshot, before it becomes visible.
  using Sink = std::function<void(const CalibrationSnapshot&)>;

  explicit CalibrationManager(const Clock& clock, Duration interval = kDefaultPollInterval,
                              std::size_t retention = kDefaultHistoryRetention);

  void add_backend(AdapterPtr adapter);
  void set_sink(Sink sink);

  /// Fetches via the adapter and stamps it with the receipt time (bumped so
  /// one backend's timestamps strictly increase). Throws ADAPTER_UNAVAILABLE;
  /// on failure latest() is unchanged. UNKNOWN_BACKEND for unregistered ids.
  CalibrationSnapshot poll(const std::string& backend_id);

  /// Throws NO_DATA before the first successful poll.
  [[nodiscard]] CalibrationSnapshot latest(const std::string& backend_id) const;
  /// Snapshots with timestamp in [from, to], ascending.
  [[nodiscard]] std::vector<CalibrationSnapshot> history(const std::string& backend_id, Timestamp from,
                                                         Timestamp to) const;
  [[nodiscard]] std::size_t history_size(const std::string& backend_id) const;

  /// Periodic mode: polls every backend whose next due time is <= now.
  /// Returns the number of successful polls. Failures are counted and the
  /// backend stays due at its next slot.
  std::size_t tick(Timestamp now);

  /// Re-inserts a persisted snapshot (replay); no sink call.
  void restore(const CalibrationSnapshot& snapshot);

  [[nodiscard]] std::size_t failed_polls(const std::string& backend_id) const;
  [[nodiscard]] std::vector<std::string> backends() const;
  [[nodiscard]] Duration interval() const { return interval_; }

 private:
  struct Track {
    AdapterPtr adapter;
    std::deque<CalibrationSnapshot> history;
    std::optional<Timestamp> next_due;
    std::size_t failures = 0;
    std::shared_ptr<std::mutex> poll_mu = std::make_shared<std::mutex>();
  };

  void insert_locked(Track& track, CalibrationSnapshot snapshot);

  const Clock& clock_;
  const Duration interval_;
  const std::size_t retention_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Track> tracks_;
  Sink sink_;
};

}  // namespace qrt
