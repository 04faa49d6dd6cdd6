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

#include "qrt/scheduler/policy.hpp"

#include <algorithm>

#include "qrt/core/error.hpp"

namespace qrt {

namespace {

bool serves(const WorkerInfo& w, const JobRecord& job) {
  if (!w.backends.contains(job.backend_id)) return false;
  return std::includes(w.stages.begin(), w.stages.end(), job.required_stages.begin(), job.required_stages.end());
}

std::vector<const Reservation*> windows_on(const SchedulerState& state, const std::string& backend) {
  std::vector<const Reservation*> out;
  for (const auto& [id, r] : state.reservations()) {
    if (r.backend_id == backend) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(), [](const Reservation* a, const Reservation* b) {
    return a->start != b->start ? a->start < b->start : a->reservation_id < b->reservation_id;
  });
  return out;
}

}  // namespace

int session_rank(const SchedulerState& state, const JobRecord& job, const std::string& backend) {
  if (!job.descriptor.session_id) return 2;
  const Session* s = state.find_session(*job.descriptor.session_id);
  if (s == nullptr || !s->open || s->backend_id != backend) return 2;
  return state.backend_session(backend) == s->session_id ? 0 : 1;
}

bool precedes(const SchedulerState& state, const JobRecord& a, const JobRecord& b, const std::string& backend) {
  const int ra = session_rank(state, a, backend);
  const int rb = session_rank(state, b, backend);
  if (ra != rb) return ra < rb;
  if (a.descriptor.priority != b.descriptor.priority) return a.descriptor.priority > b.descriptor.priority;
  if (a.submitted != b.submitted) return a.submitted < b.submitted;
  return a.job_id < b.job_id;
}

bool reservation_blocks(const SchedulerState& state, const JobRecord& job, Timestamp now) {
  const Timestamp end = now + job.estimate;
  for (const auto& [id, r] : state.reservations()) {
    if (r.backend_id != job.backend_id || r.user == job.user()) continue;
    if (r.active(now)) return true;
    if (r.start > now && r.start < end) return true;
  }
  return false;
}

std::optional<std::string> pick_worker(const SchedulerState& state, const JobRecord& job, Timestamp now,
                                       const SchedulerPolicy& policy, const std::map<std::string, int>& extra_load) {
  std::optional<std::string> best;
  int best_load = 0;
  for (const auto& [id, w] : state.workers()) {
    if (!w.live(now, policy.heartbeat_ttl) || !serves(w, job)) continue;
    int load = state.worker_load(id);
    if (auto it = extra_load.find(id); it != extra_load.end()) load += it->second;
    if (load >= w.max_parallel) continue;
    if (!best || load < best_load) {
      best = id;
      best_load = load;
    }
  }
  return best;
}

std::vector<Assignment> next_decision(const SchedulerState& state, Timestamp now, const SchedulerPolicy& policy) {
  std::map<std::string, std::vector<const JobRecord*>> queues;
  for (const auto& [id, j] : state.jobs()) {
    if (j.status == JobStatus::Queued && j.not_before <= now) queues[j.backend_id].push_back(&j);
  }
  std::vector<Assignment> out;
  std::map<std::string, int> extra_load;
  for (auto& [backend, queue] : queues) {
    if (state.occupant(backend) != nullptr) continue;
    std::sort(queue.begin(), queue.end(),
              [&](const JobRecord* a, const JobRecord* b) { return precedes(state, *a, *b, backend); });
    for (const JobRecord* j : queue) {
      if (reservation_blocks(state, *j, now)) continue;
      auto worker = pick_worker(state, *j, now, policy, extra_load);
      if (!worker) continue;
      ++extra_load[*worker];
      out.push_back({j->job_id, *worker, backend});
      break;
    }
  }
  return out;
}

Duration backoff(int attempts, Duration cap) {
  if (attempts <= 0) return Duration::zero();
  if (attempts >= 30) return cap;
  return std::min<Duration>(cap, std::chrono::seconds(std::int64_t{1} << attempts));
}

nlohmann::json failure_transition(const JobRecord& job, Timestamp now, const nlohmann::json& error, bool permanent,
                                  const SchedulerPolicy& policy) {
  const int attempts = job.attempts + 1;
  const bool give_up = permanent || attempts > job.descriptor.max_retries;
  auto p = events::transition(job.job_id, job.status, give_up ? JobStatus::Failed : JobStatus::Queued);
  p["failure"] = true;
  p["error"] = error;
  if (!give_up) p["not_before"] = to_iso8601(now + backoff(attempts, policy.max_backoff));
  return p;
}

std::vector<std::string> orphaned_jobs(const SchedulerState& state, Timestamp now, const SchedulerPolicy& policy) {
  std::vector<std::string> out;
  for (const auto& [id, j] : state.jobs()) {
    if (j.status != JobStatus::Scheduled && j.status != JobStatus::Running) continue;
    auto w = state.workers().find(j.worker_id);
    if (w == state.workers().end() || !w->second.live(now, policy.heartbeat_ttl)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> idle_sessions(const SchedulerState& state, Timestamp now) {
  std::set<std::string> busy;
  for (const auto& [id, j] : state.jobs()) {
    if (is_active(j.status) && j.descriptor.session_id) busy.insert(*j.descriptor.session_id);
  }
  std::vector<std::string> out;
  for (const auto& [id, s] : state.sessions()) {
    if (s.open && !busy.contains(id) && now - s.last_activity > s.ttl) out.push_back(id);
  }
  return out;
}

Duration eta(const SchedulerState& state, const std::string& job_id, Timestamp now) {
  const JobRecord& job = state.job(job_id);
  if (job.status != JobStatus::Queued && job.status != JobStatus::Scheduled) return Duration::zero();
  const std::string& backend = job.backend_id;

  Duration wait = Duration::zero();
  if (const JobRecord* running = state.occupant(backend); running != nullptr && running != &job) {
    const Timestamp began = running->started.value_or(now);
    wait += std::max(Duration::zero(), began + running->estimate - now);
  }
  if (job.status == JobStatus::Queued) {
    for (const auto& [id, other] : state.jobs()) {
      if (&other == &job || other.backend_id != backend || other.status != JobStatus::Queued) continue;
      if (precedes(state, other, job, backend)) wait += other.estimate;
    }
    wait = std::max(wait, job.not_before - now);
  }

  // Other users' windows push the start back by their remaining length when
  // they begin before the job would be done.
  Timestamp start = now + wait;
  for (const Reservation* r : windows_on(state, backend)) {
    if (r->user == job.user() || r->end() <= now) continue;
    if (r->start < start + job.estimate) start += r->end() - std::max(r->start, now);
  }
  return start - now;
}

void check_admission(const SchedulerState& state, const std::string& user, const std::string& backend,
                     const std::set<std::string>& stages, Timestamp now, const SchedulerPolicy& policy) {
  std::vector<const WorkerInfo*> live;
  for (const auto& [id, w] : state.workers()) {
    if (w.live(now, policy.heartbeat_ttl) && w.backends.contains(backend)) live.push_back(&w);
  }
  for (const auto& stage : stages) {
    const bool covered =
        std::any_of(live.begin(), live.end(), [&](const WorkerInfo* w) { return w->stages.contains(stage); });
    if (!covered) {
      throw Error(codes::kCapabilityMissing, "no live worker offers stage '" + stage + "' on " + backend,
                  {{"stage", stage}, {"backend", backend}});
    }
  }
  const bool one_covers = std::any_of(live.begin(), live.end(), [&](const WorkerInfo* w) {
    return std::includes(w->stages.begin(), w->stages.end(), stages.begin(), stages.end());
  });
  if (!one_covers) {
    throw Error(codes::kCapabilityMissing, "no live worker offers every requested stage on " + backend,
                {{"stage", nullptr}, {"stages", stages}, {"backend", backend}});
  }
  const int active = state.active_jobs(user);
  if (active >= policy.user_limit) {
    throw Error(codes::kUserLimitExceeded,
                user + " already has " + std::to_string(active) + " active jobs (limit " +
                    std::to_string(policy.user_limit) + ")",
                {{"user", user}, {"active", active}, {"limit", policy.user_limit}});
  }
}

std::optional<std::string> reservation_conflict(const SchedulerState& state, const std::string& backend,
                                                Timestamp start, Duration duration) {
  for (const auto& [id, r] : state.reservations()) {
    if (r.backend_id == backend && r.overlaps(start, start + duration)) return id;
  }
  return std::nullopt;
}

}  // namespace qrt
