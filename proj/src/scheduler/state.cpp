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

#include "qrt/scheduler/state.hpp"

#include <cstdio>

#include "qrt/core/error.hpp"
#include "qrt/transpiler/transpiler.hpp"

namespace qrt {

namespace {

using nlohmann::json;

std::string numbered(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%06zu", prefix, n);
  return buf;
}

std::string idem_key(const std::string& user, const std::string& key) { return user + "\n" + key; }

JobStatus status_field(const json& p, const char* key) {
  return job_status_from_string(p.at(key).get<std::string>());
}

json initial_progress(const JobDescriptor& d) {
  if (d.kind == JobKind::Hybrid) return {{"iteration", 0}, {"total", d.hybrid ? d.hybrid->iterations : 0}};
  return {{"completed_items", 0}, {"total", d.items.size()}};
}

}  // namespace

const JobRecord* SchedulerState::find_job(const std::string& id) const {
  auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : &it->second;
}

const JobRecord& SchedulerState::job(const std::string& id) const {
  if (const auto* j = find_job(id)) return *j;
  throw Error(codes::kUnknownJob, "unknown job '" + id + "'", {{"job_id", id}});
}

const Session* SchedulerState::find_session(const std::string& id) const {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

double SchedulerState::duration_factor(const std::string& backend) const {
  auto it = factors_.find(backend);
  return it == factors_.end() ? 1.0 : it->second;
}

std::string SchedulerState::backend_session(const std::string& backend) const {
  auto it = backend_session_.find(backend);
  return it == backend_session_.end() ? std::string() : it->second;
}

const JobRecord* SchedulerState::occupant(const std::string& backend) const {
  for (const auto& [id, j] : jobs_) {
    if (j.backend_id == backend && (j.status == JobStatus::Scheduled || j.status == JobStatus::Running)) return &j;
  }
  return nullptr;
}

int SchedulerState::worker_load(const std::string& worker_id) const {
  int n = 0;
  for (const auto& [id, j] : jobs_) {
    n += j.worker_id == worker_id && (j.status == JobStatus::Scheduled || j.status == JobStatus::Running);
  }
  return n;
}

int SchedulerState::active_jobs(const std::string& user) const {
  int n = 0;
  for (const auto& [id, j] : jobs_) n += j.user() == user && is_active(j.status);
  return n;
}

std::optional<std::string> SchedulerState::idempotent_job(const std::string& user, const std::string& key) const {
  auto it = idempotency_.find(idem_key(user, key));
  if (it == idempotency_.end()) return std::nullopt;
  return it->second;
}

std::string SchedulerState::next_job_id() const { return numbered("job", jobs_.size() + 1); }
std::string SchedulerState::next_reservation_id() const { return numbered("res", reservations_.size() + 1); }
std::string SchedulerState::next_session_id() const { return numbered("ses", sessions_.size() + 1); }

void SchedulerState::check(const Event& e) const {
  validate_event(e.kind, e.payload);
  const json& p = e.payload;
  if (e.kind == "job_submitted") {
    const auto id = p.at("job_id").get<std::string>();
    if (jobs_.contains(id)) throw Error(codes::kConflict, "job '" + id + "' already exists", {{"job_id", id}});
    check_descriptor(descriptor_from_json(p.at("descriptor")));
  } else if (e.kind == "job_transition") {
    const auto& j = job(p.at("job_id").get<std::string>());
    const auto from = status_field(p, "from");
    const auto to = status_field(p, "to");
    if (j.status != from || !is_legal_transition(from, to)) {
      throw Error(codes::kIllegalTransition,
                  j.job_id + ": " + std::string(to_string(j.status)) + " -> " + std::string(to_string(to)) +
                      " (event says from " + std::string(to_string(from)) + ")",
                  {{"job_id", j.job_id}, {"status", to_string(j.status)}, {"to", to_string(to)}});
    }
    if (to == JobStatus::Scheduled && !p.contains("worker_id")) {
      throw Error(codes::kSchemaViolation, "a SCHEDULED transition names its worker", {{"field", "worker_id"}});
    }
  } else if (e.kind == "job_checkpoint") {
    const auto& j = job(p.at("job_id").get<std::string>());
    if (j.status != JobStatus::Running) {
      throw Error(codes::kIllegalTransition, j.job_id + " is not running", {{"job_id", j.job_id}});
    }
  } else if (e.kind == "worker_heartbeat") {
    const auto id = p.at("worker_id").get<std::string>();
    if (!workers_.contains(id)) throw Error(codes::kUnknownWorker, "unknown worker '" + id + "'", {{"worker_id", id}});
  } else if (e.kind == "reservation_created") {
    const auto r = reservation_from_json(p);
    if (reservations_.contains(r.reservation_id)) {
      throw Error(codes::kConflict, "reservation '" + r.reservation_id + "' already exists");
    }
    for (const auto& [id, other] : reservations_) {
      if (other.backend_id == r.backend_id && other.overlaps(r.start, r.end())) {
        throw Error(codes::kConflict, "overlaps reservation " + id, {{"reservation_id", id}});
      }
    }
  } else if (e.kind == "session_opened") {
    const auto id = p.at("session_id").get<std::string>();
    if (sessions_.contains(id)) throw Error(codes::kConflict, "session '" + id + "' already exists");
  } else if (e.kind == "session_closed") {
    const auto id = p.at("session_id").get<std::string>();
    if (!sessions_.contains(id)) {
      throw Error(codes::kUnknownSession, "unknown session '" + id + "'", {{"session_id", id}});
    }
  }
}

void SchedulerState::apply(const Event& e) {
  check(e);
  const json& p = e.payload;
  auto touch_session = [&](const JobRecord& j) {
    if (!j.descriptor.session_id) return;
    if (auto it = sessions_.find(*j.descriptor.session_id); it != sessions_.end()) it->second.last_activity = e.timestamp;
  };

  if (e.kind == "job_submitted") {
    JobRecord r;
    r.job_id = p.at("job_id").get<std::string>();
    r.descriptor = descriptor_from_json(p.at("descriptor"));
    r.descriptor.user = p.at("user").get<std::string>();
    r.backend_id = p.at("backend_id").get<std::string>();
    r.submitted = e.timestamp;
    r.not_before = e.timestamp;
    r.estimate = Duration{p.at("estimate_us").get<std::int64_t>()};
    r.seed = p.at("seed").get<std::uint64_t>();
    r.required_stages = p.at("required_stages").get<std::set<std::string>>();
    r.idempotency_key = p.value("idempotency_key", "");
    r.progress = initial_progress(r.descriptor);
    if (!r.idempotency_key.empty()) idempotency_[idem_key(r.user(), r.idempotency_key)] = r.job_id;
    touch_session(r);
    jobs_[r.job_id] = std::move(r);
  } else if (e.kind == "job_transition") {
    JobRecord& j = jobs_.at(p.at("job_id").get<std::string>());
    const auto to = status_field(p, "to");
    const bool failure = p.value("failure", false);
    if (failure) ++j.attempts;
    if (auto it = p.find("error"); it != p.end()) j.error = *it;
    switch (to) {
      case JobStatus::Scheduled:
        j.worker_id = p.at("worker_id").get<std::string>();
        break;
      case JobStatus::Running:
        ++j.runs;
        j.started = e.timestamp;
        backend_session_[j.backend_id] = j.descriptor.session_id.value_or("");
        break;
      case JobStatus::Queued:
        j.worker_id.clear();
        j.not_before = p.contains("not_before") ? parse_iso8601(p.at("not_before").get<std::string>()) : e.timestamp;
        break;
      case JobStatus::Completed:
        if (auto it = p.find("results"); it != p.end()) j.results = *it;
        j.error = nullptr;
        j.finished = e.timestamp;
        break;
      case JobStatus::Failed:
      case JobStatus::Cancelled:
        j.finished = e.timestamp;
        break;
    }
    j.status = to;
    touch_session(j);
  } else if (e.kind == "job_checkpoint") {
    JobRecord& j = jobs_.at(p.at("job_id").get<std::string>());
    j.checkpoint = p.at("checkpoint");
    if (auto it = p.find("progress"); it != p.end()) j.progress = *it;
    touch_session(j);
  } else if (e.kind == "worker_registered") {
    WorkerInfo w;
    w.worker_id = p.at("worker_id").get<std::string>();
    w.stages = p.at("stages").get<std::set<std::string>>();
    w.backends = p.at("backends").get<std::set<std::string>>();
    w.max_parallel = p.at("max_parallel").get<int>();
    w.last_heartbeat = e.timestamp;
    workers_[w.worker_id] = std::move(w);
  } else if (e.kind == "worker_heartbeat") {
    workers_.at(p.at("worker_id").get<std::string>()).last_heartbeat = e.timestamp;
  } else if (e.kind == "reservation_created") {
    auto r = reservation_from_json(p);
    reservations_[r.reservation_id] = std::move(r);
  } else if (e.kind == "session_opened") {
    Session s;
    s.session_id = p.at("session_id").get<std::string>();
    s.user = p.at("user").get<std::string>();
    s.backend_id = p.at("backend_id").get<std::string>();
    s.ttl = Duration{p.at("ttl_us").get<std::int64_t>()};
    s.opened = e.timestamp;
    s.last_activity = e.timestamp;
    sessions_[s.session_id] = std::move(s);
  } else if (e.kind == "session_closed") {
    Session& s = sessions_.at(p.at("session_id").get<std::string>());
    if (s.open) {
      s.open = false;
      s.close_reason = p.value("reason", "closed");
    }
  } else if (e.kind == "calibration") {
    auto snap = calibration_from_json(p.at("snapshot"));
    auto& history = calibrations_[snap.backend_id];
    history.push_back(std::move(snap));
    while (history.size() > kCalibrationHistoryLimit) history.pop_front();
  } else if (e.kind == "duration_feedback") {
    const auto estimate = static_cast<double>(p.at("estimate_us").get<std::int64_t>());
    const auto observed = static_cast<double>(p.at("observed_us").get<std::int64_t>());
    if (estimate > 0.0 && observed >= 0.0) {
      auto [it, fresh] = factors_.try_emplace(p.at("backend_id").get<std::string>(), 1.0);
      it->second = (1.0 - DurationModel::kAlpha) * it->second + DurationModel::kAlpha * (observed / estimate);
    }
  }
  applied_seq_ = e.seq;
}

json SchedulerState::to_json() const {
  json jobs = json::array();
  for (const auto& [id, j] : jobs_) jobs.push_back(qrt::to_json(j));
  json workers = json::array();
  for (const auto& [id, w] : workers_) workers.push_back(qrt::to_json(w));
  json reservations = json::array();
  for (const auto& [id, r] : reservations_) reservations.push_back(qrt::to_json(r));
  json sessions = json::array();
  for (const auto& [id, s] : sessions_) sessions.push_back(qrt::to_json(s));
  json calibrations = json::object();
  for (const auto& [b, history] : calibrations_) {
    json arr = json::array();
    for (const auto& snap : history) arr.push_back(qrt::to_json(snap));
    calibrations[b] = arr;
  }
  json idem = json::array();
  for (const auto& [k, id] : idempotency_) idem.push_back({k, id});
  return {{"applied_seq", applied_seq_},  {"jobs", jobs},
          {"workers", workers},           {"reservations", reservations},
          {"sessions", sessions},         {"calibrations", calibrations},
          {"duration_factors", factors_}, {"backend_session", backend_session_},
          {"idempotency", idem}};
}

SchedulerState SchedulerState::from_json(const json& j) {
  SchedulerState s;
  s.applied_seq_ = j.at("applied_seq").get<std::int64_t>();
  for (const auto& x : j.at("jobs")) {
    auto r = job_from_json(x);
    s.jobs_[r.job_id] = std::move(r);
  }
  for (const auto& x : j.at("workers")) {
    auto w = worker_from_json(x);
    s.workers_[w.worker_id] = std::move(w);
  }
  for (const auto& x : j.at("reservations")) {
    auto r = reservation_from_json(x);
    s.reservations_[r.reservation_id] = std::move(r);
  }
  for (const auto& x : j.at("sessions")) {
    auto se = session_from_json(x);
    s.sessions_[se.session_id] = std::move(se);
  }
  for (const auto& [b, arr] : j.at("calibrations").items()) {
    auto& history = s.calibrations_[b];
    for (const auto& x : arr) history.push_back(calibration_from_json(x));
  }
  s.factors_ = j.at("duration_factors").get<std::map<std::string, double>>();
  s.backend_session_ = j.at("backend_session").get<std::map<std::string, std::string>>();
  for (const auto& x : j.at("idempotency")) s.idempotency_[x.at(0).get<std::string>()] = x.at(1).get<std::string>();
  return s;
}

namespace events {

json job_submitted(const JobRecord& r) {
  json d = to_json(r.descriptor);
  d.erase("user");
  json p{{"job_id", r.job_id},
         {"user", r.user()},
         {"backend_id", r.backend_id},
         {"descriptor", d},
         {"required_stages", r.required_stages},
         {"estimate_us", r.estimate.count()},
         {"seed", r.seed}};
  if (!r.idempotency_key.empty()) p["idempotency_key"] = r.idempotency_key;
  return p;
}

json transition(const std::string& job_id, JobStatus from, JobStatus to) {
  return {{"job_id", job_id}, {"from", to_string(from)}, {"to", to_string(to)}};
}

json checkpoint(const std::string& job_id, const json& checkpoint, const json& progress) {
  return {{"job_id", job_id}, {"checkpoint", checkpoint}, {"progress", progress}};
}

json worker_registered(const WorkerInfo& w) {
  return {{"worker_id", w.worker_id}, {"stages", w.stages}, {"backends", w.backends}, {"max_parallel", w.max_parallel}};
}

json reservation_created(const Reservation& r) { return to_json(r); }

json session_opened(const Session& s) {
  return {{"session_id", s.session_id}, {"user", s.user}, {"backend_id", s.backend_id}, {"ttl_us", s.ttl.count()}};
}

}  // namespace events

}  // namespace qrt
