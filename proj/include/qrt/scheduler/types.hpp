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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/circuit/circuit.hpp"
#include "qrt/core/time.hpp"
#include "qrt/pipeline/pipeline.hpp"

namespace qrt {

enum class JobStatus { Queued, Scheduled, Running, Completed, Failed, Cancelled };

[[nodiscard]] std::string_view to_string(JobStatus s);
/// Throws INVALID_ARGUMENT.
[[nodiscard]] JobStatus job_status_from_string(std::string_view s);
[[nodiscard]] bool is_terminal(JobStatus s);
[[nodiscard]] inline bool is_active(JobStatus s) { return !is_terminal(s); }
[[nodiscard]] bool is_legal_transition(JobStatus from, JobStatus to);

enum class JobKind { Single, Batch, Hybrid };

[[nodiscard]] std::string_view to_string(JobKind k);
[[nodiscard]] JobKind job_kind_from_string(std::string_view s);

struct JobItem {
  std::string circuit;
  std::vector<StageSpec> execution_options;
  std::int64_t shots = 1024;
  std::string observable;

  bool operator==(const JobItem&) const = default;
};

struct SpsaConfig {
  double a = 0.5;
  double c = 0.2;

  bool operator==(const SpsaConfig&) const = default;
};

struct HybridConfig {
  ParamBinding initial_params;
  int iterations = 0;
  SpsaConfig spsa;
  std::string target = "minimize";

  bool operator==(const HybridConfig&) const = default;
};

inline constexpr int kDefaultMaxRetries = 3;
inline constexpr const char* kAutoBackend = "auto";

struct JobDescriptor {
  std::string user;
  JobKind kind = JobKind::Single;
  std::string backend_name;
  std::vector<JobItem> items;
  int priority = 0;
  std::optional<std::string> session_id;
  int max_retries = kDefaultMaxRetries;
  std::optional<std::uint64_t> seed;
  std::optional<HybridConfig> hybrid;

  bool operator==(const JobDescriptor&) const = default;
};

/// Wire form. `user` is included only when non-empty.
[[nodiscard]] nlohmann::json to_json(const JobDescriptor& d);
/// Throws SCHEMA_VIOLATION for shape errors.
[[nodiscard]] JobDescriptor descriptor_from_json(const nlohmann::json& j);
/// Throws INVALID_ARGUMENT / INVALID_SHOTS when an invariant fails: items
/// nonempty, shots >= 1, single has one item, hybrid has exactly one item.
void check_descriptor(const JobDescriptor& d);

/// Union of stage names used by all items.
[[nodiscard]] std::set<std::string> required_stages(const JobDescriptor& d);

struct JobRecord {
  std::string job_id;
  JobDescriptor descriptor;
  std::string backend_id;
  JobStatus status = JobStatus::Queued;
  /// Failed runs so far; at most max_retries + 1.
  int attempts = 0;
  /// Times the job entered RUNNING.
  int runs = 0;
  Timestamp submitted{};
  std::optional<Timestamp> started;
  std::optional<Timestamp> finished;
  Timestamp not_before{};
  std::string worker_id;
  Duration estimate{};
  std::uint64_t seed = 0;
  std::set<std::string> required_stages;
  std::string idempotency_key;
  nlohmann::json checkpoint;
  nlohmann::json progress;
  nlohmann::json results;
  nlohmann::json error;

  [[nodiscard]] const std::string& user() const { return descriptor.user; }
};

[[nodiscard]] nlohmann::json to_json(const JobRecord& r);
[[nodiscard]] JobRecord job_from_json(const nlohmann::json& j);

inline constexpr Duration kDefaultHeartbeatTtl = std::chrono::seconds(30);

struct WorkerInfo {
  std::string worker_id;
  std::set<std::string> stages;
  std::set<std::string> backends;
  int max_parallel = 1;
  Timestamp last_heartbeat{};

  [[nodiscard]] bool live(Timestamp now, Duration ttl = kDefaultHeartbeatTtl) const {
    return now - last_heartbeat <= ttl;
  }
  bool operator==(const WorkerInfo&) const = default;
};

[[nodiscard]] nlohmann::json to_json(const WorkerInfo& w);
[[nodiscard]] WorkerInfo worker_from_json(const nlohmann::json& j);

inline constexpr Duration kDefaultReservation = std::chrono::minutes(15);

/// Half-open window [start, start + duration).
struct Reservation {
  std::string reservation_id;
  std::string backend_id;
  std::string user;
  Timestamp start{};
  Duration duration = kDefaultReservation;

  [[nodiscard]] Timestamp end() const { return start + duration; }
  [[nodiscard]] bool active(Timestamp now) const { return start <= now && now < end(); }
  [[nodiscard]] bool overlaps(Timestamp from, Timestamp to) const { return start < to && from < end(); }
  /// "pending", "active" or "expired" relative to `now`.
  [[nodiscard]] std::string status(Timestamp now) const;
  bool operator==(const Reservation&) const = default;
};

[[nodiscard]] nlohmann::json to_json(const Reservation& r);
[[nodiscard]] Reservation reservation_from_json(const nlohmann::json& j);

inline constexpr Duration kDefaultSessionTtl = std::chrono::minutes(10);

struct Session {
  std::string session_id;
  std::string user;
  std::string backend_id;
  Duration ttl = kDefaultSessionTtl;
  Timestamp opened{};
  Timestamp last_activity{};
  bool open = true;
  std::string close_reason;

  bool operator==(const Session&) const = default;
};

[[nodiscard]] nlohmann::json to_json(const Session& s);
[[nodiscard]] Session session_from_json(const nlohmann::json& j);

}  // namespace qrt
