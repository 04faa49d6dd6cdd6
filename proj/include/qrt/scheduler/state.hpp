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
#include <deque>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qrt/calibration/snapshot.hpp"
#include "qrt/scheduler/types.hpp"
#include "qrt/store/event_log.hpp"

namespace qrt {

inline constexpr std::size_t kCalibrationHistoryLimit = 1000;

/// Everything the scheduler knows, rebuilt purely by folding events. The
/// platform appends an event to the log and then applies it here; replay does
/// the same from the log, so both paths give identical state.
class SchedulerState {
 public:
  /// Throws (without mutating) when the event does not apply: UNKNOWN_JOB,
  /// ILLEGAL_TRANSITION, CONFLICT, UNKNOWN_WORKER, UNKNOWN_SESSION,
  /// SCHEMA_VIOLATION.
  void check(const Event& event) const;
  void apply(const Event& event);

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static SchedulerState from_json(const nlohmann::json& j);

  [[nodiscard]] const std::map<std::string, JobRecord>& jobs() const { return jobs_; }
  [[nodiscard]] const JobRecord* find_job(const std::string& id) const;
  /// Throws UNKNOWN_JOB.
  [[nodiscard]] const JobRecord& job(const std::string& id) const;
  [[nodiscard]] const std::map<std::string, WorkerInfo>& workers() const { return workers_; }
  [[nodiscard]] const std::map<std::string, Reservation>& reservations() const { return reservations_; }
  [[nodiscard]] const std::map<std::string, Session>& sessions() const { return sessions_; }
  [[nodiscard]] const Session* find_session(const std::string& id) const;
  [[nodiscard]] const std::map<std::string, std::deque<CalibrationSnapshot>>& calibrations() const {
    return calibrations_;
  }
  [[nodiscard]] double duration_factor(const std::string& backend) const;
  [[nodiscard]] const std::map<std::string, double>& duration_factors() const { return factors_; }

  /// Session whose job most recently started on `backend`, or "".
  [[nodiscard]] std::string backend_session(const std::string& backend) const;
  /// The job occupying `backend` (SCHEDULED or RUNNING), if any.
  [[nodiscard]] const JobRecord* occupant(const std::string& backend) const;
  /// SCHEDULED + RUNNING jobs assigned to the worker.
  [[nodiscard]] int worker_load(const std::string& worker_id) const;
  /// QUEUED + SCHEDULED + RUNNING jobs of the user.
  [[nodiscard]] int active_jobs(const std::string& user) const;
  [[nodiscard]] std::optional<std::string> idempotent_job(const std::string& user, const std::string& key) const;

  [[nodiscard]] std::string next_job_id() const;
  [[nodiscard]] std::string next_reservation_id() const;
  [[nodiscard]] std::string next_session_id() const;
  /// Seq of the last applied event.
  [[nodiscard]] std::int64_t applied_seq() const { return applied_seq_; }

  bool operator==(const SchedulerState& other) const { return to_json() == other.to_json(); }

 private:
  std::map<std::string, JobRecord> jobs_;
  std::map<std::string, WorkerInfo> workers_;
  std::map<std::string, Reservation> reservations_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::deque<CalibrationSnapshot>> calibrations_;
  std::map<std::string, double> factors_;
  std::map<std::string, std::string> backend_session_;
  std::map<std::string, std::string> idempotency_;
  std::int64_t applied_seq_ = 0;
};

/// Payload builders for the event kinds the scheduler folds.
namespace events {

[[nodiscard]] nlohmann::json job_submitted(const JobRecord& record);
[[nodiscard]] nlohmann::json transition(const std::string& job_id, JobStatus from, JobStatus to);
[[nodiscard]] nlohmann::json checkpoint(const std::string& job_id, const nlohmann::json& checkpoint,
                                        const nlohmann::json& progress);
[[nodiscard]] nlohmann::json worker_registered(const WorkerInfo& worker);
[[nodiscard]] nlohmann::json reservation_created(const Reservation& r);
[[nodiscard]] nlohmann::json session_opened(const Session& s);

}  // namespace events

}  // namespace qrt
