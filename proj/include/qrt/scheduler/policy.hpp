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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qrt/scheduler/state.hpp"

namespace qrt {

inline constexpr int kDefaultUserLimit = 5;
inline constexpr Duration kMaxBackoff = std::chrono::seconds(60);

struct SchedulerPolicy {
  int user_limit = kDefaultUserLimit;
  Duration heartbeat_ttl = kDefaultHeartbeatTtl;
  Duration max_backoff = kMaxBackoff;
};

struct Assignment {
  std::string job_id;
  std::string worker_id;
  std::string backend_id;

  bool operator==(const Assignment&) const = default;
};

/// 0: job belongs to the session that last ran on `backend` and is still
/// open; 1: another open session bound to `backend`; 2: no session.
[[nodiscard]] int session_rank(const SchedulerState& state, const JobRecord& job, const std::string& backend);

/// Strict queue order on one backend: session rank, priority (larger first),
/// submission time, job id.
[[nodiscard]] bool precedes(const SchedulerState& state, const JobRecord& a, const JobRecord& b,
                            const std::string& backend);

/// True when a reservation keeps `job` off its backend if started at `now`:
/// another user's window is active, or would begin before the job's
/// estimated end.
[[nodiscard]] bool reservation_blocks(const SchedulerState& state, const JobRecord& job, Timestamp now);

/// Live worker with the job's stages and backend and spare capacity: least
/// loaded first, then lowest id.
[[nodiscard]] std::optional<std::string> pick_worker(const SchedulerState& state, const JobRecord& job, Timestamp now,
                                                     const SchedulerPolicy& policy,
                                                     const std::map<std::string, int>& extra_load = {});

/// Pure decision function: at most one new assignment per idle backend.
[[nodiscard]] std::vector<Assignment> next_decision(const SchedulerState& state, Timestamp now,
                                                    const SchedulerPolicy& policy = {});

/// 2^attempts seconds, capped.
[[nodiscard]] Duration backoff(int attempts, Duration cap = kMaxBackoff);

/// Transition payload after a failed run at `now`: back to QUEUED with
/// not_before = now + backoff(attempts + 1), or FAILED when the error is
/// permanent or max_retries is used up. Counts as a failure either way.
[[nodiscard]] nlohmann::json failure_transition(const JobRecord& job, Timestamp now, const nlohmann::json& error,
                                                bool permanent, const SchedulerPolicy& policy = {});

/// SCHEDULED or RUNNING jobs whose worker has missed its heartbeat.
[[nodiscard]] std::vector<std::string> orphaned_jobs(const SchedulerState& state, Timestamp now,
                                                     const SchedulerPolicy& policy = {});

/// Open sessions with nothing active that have been quiet longer than their ttl.
[[nodiscard]] std::vector<std::string> idle_sessions(const SchedulerState& state, Timestamp now);

/// Estimated wait before the job starts: time left on the running job, the
/// estimates of queued jobs ahead of it, and other users' reservation windows
/// that fall inside that horizon. Zero for running or finished jobs' start.
/// Throws UNKNOWN_JOB.
[[nodiscard]] Duration eta(const SchedulerState& state, const std::string& job_id, Timestamp now);

/// Throws CAPABILITY_MISSING (first stage no live worker covers for this
/// backend) or USER_LIMIT_EXCEEDED.
void check_admission(const SchedulerState& state, const std::string& user, const std::string& backend,
                     const std::set<std::string>& stages, Timestamp now, const SchedulerPolicy& policy = {});

/// Id of an existing reservation on `backend` overlapping [start, start+duration).
[[nodiscard]] std::optional<std::string> reservation_conflict(const SchedulerState& state, const std::string& backend,
                                                              Timestamp start, Duration duration);

}  // namespace qrt
