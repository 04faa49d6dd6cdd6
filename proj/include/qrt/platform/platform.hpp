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

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/backend/adapter.hpp"
#include "qrt/calibration/manager.hpp"
#include "qrt/pipeline/pipeline.hpp"
#include "qrt/platform/config.hpp"
#include "qrt/scheduler/estimator.hpp"
#include "qrt/scheduler/policy.hpp"
#include "qrt/scheduler/state.hpp"
#include "qrt/store/event_log.hpp"

namespace qrt {

struct SubmitResult {
  std::string job_id;
  /// False when an idempotency key matched an earlier submission.
  bool created = true;
};

/// The running service core: owns the event log, the scheduler state folded
/// from it, the calibration manager, the backend adapters and the local
/// workers. Every mutation is one ordered append under a single lock
/// (check, append, apply); jobs execute on their own threads and report back
/// through the same path.
class Platform {
 public:
  /// Builds the simulated fleet from `config` unless adapters are given.
  /// Replays the log under config.data_dir; jobs that were SCHEDULED or
  /// RUNNING when the previous process stopped go back to QUEUED and resume
  /// from their last checkpoint.
  Platform(PlatformConfig config, const Clock& clock, std::vector<AdapterPtr> adapters = {});
  ~Platform();
  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  /// Starts the background decision loop.
  void start();
  /// Stops the loop and abandons running jobs (they stay RUNNING in the log
  /// and are requeued on the next start). Idempotent.
  void stop();
  /// One pass of the decision loop: calibration polling, worker and session
  /// expiry, assignments. The background loop calls this every tick.
  void step();

  /// Throws SCHEMA_VIOLATION, SYNTAX_ERROR and friends, UNKNOWN_BACKEND,
  /// UNKNOWN_SESSION, FORBIDDEN, CAPABILITY_MISSING, USER_LIMIT_EXCEEDED,
  /// NO_CAPABLE_BACKEND, TOO_MANY_QUBITS.
  SubmitResult submit(const std::string& user, const nlohmann::json& descriptor,
                      const std::string& idempotency_key = "");
  /// Idempotent; returns the job's status afterwards.
  nlohmann::json cancel(const std::string& user, const std::string& job_id);
  [[nodiscard]] nlohmann::json job_status(const std::string& user, const std::string& job_id) const;
  /// NOT_READY while active, JOB_FAILED / JOB_CANCELLED for the other
  /// terminal states.
  [[nodiscard]] nlohmann::json job_results(const std::string& user, const std::string& job_id) const;
  [[nodiscard]] nlohmann::json list_jobs(const std::string& user) const;

  nlohmann::json open_session(const std::string& user, const std::string& backend_id,
                              std::optional<Duration> ttl = std::nullopt);
  /// Idempotent.
  nlohmann::json close_session(const std::string& user, const std::string& session_id);
  [[nodiscard]] nlohmann::json session(const std::string& user, const std::string& session_id) const;

  /// Throws INVALID_ARGUMENT (start not in the future, duration <= 0),
  /// UNKNOWN_BACKEND, CONFLICT.
  nlohmann::json reserve(const std::string& user, const std::string& backend_id, Timestamp start,
                         Duration duration = kDefaultReservation);
  [[nodiscard]] nlohmann::json reservations() const;

  [[nodiscard]] nlohmann::json backends() const;
  /// `refresh` polls the device first.
  nlohmann::json calibration(const std::string& backend_id, bool refresh);

  nlohmann::json register_worker(const WorkerInfo& worker);
  /// Idempotent. Throws UNKNOWN_WORKER.
  nlohmann::json heartbeat(const std::string& worker_id);

  /// Seq of the last committed event.
  [[nodiscard]] std::int64_t last_seq() const;
  /// Copy of the folded state.
  [[nodiscard]] SchedulerState state() const;
  [[nodiscard]] const PlatformConfig& config() const { return config_; }
  [[nodiscard]] AdapterPtr adapter(const std::string& backend_id) const;
  /// What the last startup recovered from the log.
  [[nodiscard]] const Recovered& recovered() const { return recovered_; }
  /// Number of job threads still alive.
  [[nodiscard]] std::size_t running_threads() const;

 private:
  struct ActiveRun {
    std::string job_id;
    std::atomic<bool> stop{false};
    std::atomic<bool> done{false};
    std::thread thread;
  };

  Event commit_locked(const std::string& kind, const nlohmann::json& payload);
  void launch_locked(const std::string& job_id, const std::string& worker_id);
  void run_thread(ActiveRun* run, std::string worker_id);
  void signal_stop_locked(const std::string& job_id);
  void reap();
  void heartbeat_local_locked(Timestamp now);
  void expire_locked(Timestamp now);
  void maybe_snapshot_locked();
  void loop();

  [[nodiscard]] const JobRecord& owned_job_locked(const std::string& user, const std::string& job_id) const;
  [[nodiscard]] nlohmann::json status_json_locked(const JobRecord& job, Timestamp now) const;
  [[nodiscard]] const BackendCapabilities& caps(const std::string& backend_id) const;

  PlatformConfig config_;
  const Clock& clock_;
  std::map<std::string, AdapterPtr> adapters_;
  std::map<std::string, BackendCapabilities> caps_;
  StageRegistry stages_;
  DefaultResourceEstimator estimator_;
  CalibrationManager calibration_;
  std::unique_ptr<EventLog> log_;
  std::vector<std::string> local_workers_;
  Recovered recovered_;

  mutable std::mutex mu_;
  SchedulerState state_;
  std::int64_t last_snapshot_seq_ = 0;
  std::map<std::string, std::unique_ptr<ActiveRun>> runs_;

  std::mutex loop_mu_;
  std::condition_variable loop_cv_;
  bool wake_ = false;
  std::atomic<bool> stopping_{false};
  std::thread loop_thread_;
};

/// Wire form of a backend's static description.
[[nodiscard]] nlohmann::json to_json(const BackendCapabilities& caps);

}  // namespace qrt
