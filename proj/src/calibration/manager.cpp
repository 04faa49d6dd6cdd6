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

#include "qrt/calibration/manager.hpp"

#include <algorithm>
#include <mutex>

namespace qrt {

namespace {

Error no_data(const std::string& id) {
  return Error(codes::kNoData, "no calibration for '" + id + "'", {{"backend_id", id}});
}

}  // namespace

CalibrationManager::CalibrationManager(const Clock& clock, Duration interval, std::size_t retention)
    : clock_(clock), interval_(interval), retention_(std::max<std::size_t>(1, retention)) {}

void CalibrationManager::add_backend(AdapterPtr adapter) {
  const auto id = adapter->capabilities().backend_id;
  std::unique_lock lock(mu_);
  tracks_[id].adapter = std::move(adapter);
}

void CalibrationManager::set_sink(Sink sink) {
  std::unique_lock lock(mu_);
  sink_ = std::move(sink);
}

CalibrationSnapshot CalibrationManager::poll(const std::string& backend_id) {
  AdapterPtr adapter;
  std::shared_ptr<std::mutex> poll_mu;
  {
    std::shared_lock lock(mu_);
    auto it = tracks_.find(backend_id);
    if (it == tracks_.end() || !it->second.adapter) {
      throw Error(codes::kUnknownBackend, "unknown backend '" + backend_id + "'", {{"backend_id", backend_id}});
    }
    adapter = it->second.adapter;
    poll_mu = it->second.poll_mu;
  }
  std::lock_guard serial(*poll_mu);
  CalibrationSnapshot snap;
  try {
    snap = adapter->calibration();
  } catch (const std::exception& e) {
    std::unique_lock lock(mu_);
    ++tracks_[backend_id].failures;
    throw Error(codes::kAdapterUnavailable, "calibration poll of '" + backend_id + "' failed: " + e.what(),
                {{"backend_id", backend_id}});
  }
  snap.backend_id = backend_id;
  snap.timestamp = clock_.now();
  std::unique_lock lock(mu_);
  auto& track = tracks_[backend_id];
  if (!track.history.empty() && snap.timestamp <= track.history.back().timestamp) {
    snap.timestamp = track.history.back().timestamp + Duration(1);
  }
  if (sink_) sink_(snap);
  insert_locked(track, snap);
  return snap;
}

void CalibrationManager::insert_locked(Track& track, CalibrationSnapshot snapshot) {
  if (!track.history.empty() && snapshot.timestamp <= track.history.back().timestamp) return;
  track.history.push_back(std::move(snapshot));
  while (track.history.size() > retention_) track.history.pop_front();
}

CalibrationSnapshot CalibrationManager::latest(const std::string& backend_id) const {
  std::shared_lock lock(mu_);
  auto it = tracks_.find(backend_id);
  if (it == tracks_.end() || it->second.history.empty()) throw no_data(backend_id);
  return it->second.history.back();
}

std::vector<CalibrationSnapshot> CalibrationManager::history(const std::string& backend_id, Timestamp from,
                                                             Timestamp to) const {
  std::shared_lock lock(mu_);
  std::vector<CalibrationSnapshot> out;
  auto it = tracks_.find(backend_id);
  if (it == tracks_.end()) return out;
  for (const auto& s : it->second.history) {
    if (s.timestamp >= from && s.timestamp <= to) out.push_back(s);
  }
  return out;
}

std::size_t CalibrationManager::history_size(const std::string& backend_id) const {
  std::shared_lock lock(mu_);
  auto it = tracks_.find(backend_id);
  return it == tracks_.end() ? 0 : it->second.history.size();
}

std::size_t CalibrationManager::tick(Timestamp now) {
  std::vector<std::string> due;
  {
    std::unique_lock lock(mu_);
    for (auto& [id, track] : tracks_) {
      if (!track.adapter) continue;
      if (!track.next_due) track.next_due = now;
      if (*track.next_due > now) continue;
      due.push_back(id);
      // Advance by whole intervals so slow ticks do not accumulate drift.
      while (*track.next_due <= now) *track.next_due += interval_;
    }
  }
  std::size_t polled = 0;
  for (const auto& id : due) {
    try {
      (void)poll(id);
      ++polled;
    } catch (const Error&) {
      // Already counted in failures; latest() keeps the previous snapshot.
    }
  }
  return polled;
}

void CalibrationManager::restore(const CalibrationSnapshot& snapshot) {
  std::unique_lock lock(mu_);
  insert_locked(tracks_[snapshot.backend_id], snapshot);
}

std::size_t CalibrationManager::failed_polls(const std::string& backend_id) const {
  std::shared_lock lock(mu_);
  auto it = tracks_.find(backend_id);
  return it == tracks_.end() ? 0 : it->second.failures;
}

std::vector<std::string> CalibrationManager::backends() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, track] : tracks_) {
    if (track.adapter) ids.push_back(id);
  }
  return ids;
}

}  // namespace qrt
