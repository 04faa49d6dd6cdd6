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

#include "qrt/platform/platform.hpp"

#include <filesystem>

#include <spdlog/spdlog.h>

#include "qrt/backend/simulated_device.hpp"
#include "qrt/circuit/qasm.hpp"
#include "qrt/core/error.hpp"
#include "qrt/core/random.hpp"
#include "qrt/scheduler/job_runner.hpp"

namespace qrt {

namespace {

using nlohmann::json;

json optional_time(const std::optional<Timestamp>& t) { return t ? json(to_iso8601(*t)) : json(nullptr); }

json reservation_json(const Reservation& r, Timestamp now) {
  json out = to_json(r);
  out["end"] = to_iso8601(r.end());
  out["status"] = r.status(now);
  return out;
}

json error_json(const std::string& code, const std::string& message, const json& details) {
  return {{"code", code}, {"message", message}, {"details", details.is_object() ? details : json::object()}};
}

std::vector<Circuit> parse_items(const JobDescriptor& d) {
  std::vector<Circuit> out;
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    try {
      out.push_back(parse_qasm(d.items[i].circuit));
    } catch (const Error& e) {
      json details = e.details().is_object() ? e.details() : json::object();
      details["item"] = i;
      throw Error(e.code(), "item " + std::to_string(i) + ": " + e.what(), details);
    }
  }
  return out;
}

void check_symbols(const JobDescriptor& d, const std::vector<Circuit>& circuits) {
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const auto& symbols = circuits[i].symbols();
    if (d.kind != JobKind::Hybrid) {
      if (!symbols.empty()) {
        throw Error(codes::kUnboundSymbol, "item " + std::to_string(i) + " has unbound parameter '" +
                                               *symbols.begin() + "'",
                    {{"item", i}, {"symbol", *symbols.begin()}});
      }
      continue;
    }
    for (const auto& s : symbols) {
      if (!d.hybrid->initial_params.contains(s)) {
        throw Error(codes::kUnboundSymbol, "initial_params has no value for '" + s + "'", {{"symbol", s}});
      }
    }
    for (const auto& [name, value] : d.hybrid->initial_params) {
      if (!symbols.contains(name)) {
        throw Error(codes::kInvalidArgument, "circuit has no parameter '" + name + "'", {{"symbol", name}});
      }
    }
  }
}

}  // namespace

json to_json(const BackendCapabilities& caps) {
  json coupling = json::array();
  for (const auto& [a, b] : caps.coupling) coupling.push_back({a, b});
  return {{"backend_id", caps.backend_id},
          {"num_qubits", caps.num_qubits},
          {"basis_gates", caps.basis_gates},
          {"coupling_map", coupling},
          {"gate_durations_ns", caps.gate_durations_ns},
          {"readout_duration_ns", caps.readout_duration_ns},
          {"max_shots", caps.max_shots}};
}

Platform::Platform(PlatformConfig config, const Clock& clock, std::vector<AdapterPtr> adapters)
    : config_(std::move(config)),
      clock_(clock),
      stages_(StageRegistry::with_builtin_stages()),
      calibration_(clock, config_.poll_interval) {
  if (adapters.empty()) {
    FleetOptions fo;
    fo.noiseless = config_.noiseless;
    fo.seed = config_.fleet_seed;
    fo.device.dilation_us_per_ns_shot = config_.dilation_us_per_ns_shot;
    if (!config_.drift) fo.device.drift = DriftConfig::none();
    std::vector<BackendCapabilities> devices;
    for (const auto& spec : config_.fleet) {
      devices.push_back(spec.topology == "ring" ? ring_device(spec.backend_id, spec.num_qubits)
                                                : line_device(spec.backend_id, spec.num_qubits));
    }
    for (auto& d : make_fleet(clock_, std::move(devices), fo)) adapters.push_back(std::move(d));
  }
  for (auto& a : adapters) {
    auto c = a->capabilities();
    calibration_.add_backend(a);
    adapters_[c.backend_id] = a;
    caps_[c.backend_id] = std::move(c);
  }

  std::filesystem::create_directories(config_.data_dir);
  EventLog::Options options;
  options.path = std::filesystem::path(config_.data_dir) / "events.log";
  options.fsync = config_.fsync;
  log_ = std::make_unique<EventLog>(options);
  recovered_ = recover(
      *log_, [this](const json& body) { state_ = SchedulerState::from_json(body); },
      [this](const Event& e) { state_.apply(e); });
  last_snapshot_seq_ = recovered_.snapshot_seq;
  if (recovered_.truncated) {
    spdlog::warn("event log truncated after seq {}: {}", recovered_.last_seq, recovered_.reason);
  }

  for (const auto& [backend, history] : state_.calibrations()) {
    if (!caps_.contains(backend)) continue;
    for (const auto& snap : history) calibration_.restore(snap);
  }
  calibration_.set_sink([this](const CalibrationSnapshot& snap) {
    std::lock_guard lock(mu_);
    commit_locked("calibration", {{"snapshot", to_json(snap)}});
  });

  std::lock_guard lock(mu_);
  std::vector<std::pair<std::string, JobStatus>> interrupted;
  for (const auto& [id, j] : state_.jobs()) {
    if (j.status == JobStatus::Scheduled || j.status == JobStatus::Running) interrupted.emplace_back(id, j.status);
  }
  for (const auto& [id, status] : interrupted) {
    auto p = events::transition(id, status, JobStatus::Queued);
    p["reason"] = "restart";
    commit_locked("job_transition", p);
  }
  std::set<std::string> backends;
  for (const auto& [id, c] : caps_) backends.insert(id);
  for (int i = 1; i <= config_.local_workers; ++i) {
    WorkerInfo w;
    w.worker_id = "worker-" + std::to_string(i);
    w.stages = stages_.names();
    w.backends = backends;
    w.max_parallel = static_cast<int>(backends.size());
    commit_locked("worker_registered", events::worker_registered(w));
    local_workers_.push_back(w.worker_id);
  }
}

Platform::~Platform() { stop(); }

void Platform::start() {
  if (loop_thread_.joinable()) return;
  stopping_ = false;
  loop_thread_ = std::thread([this] { loop(); });
}

void Platform::stop() {
  stopping_ = true;
  {
    std::lock_guard l(loop_mu_);
    wake_ = true;
  }
  loop_cv_.notify_all();
  if (loop_thread_.joinable()) loop_thread_.join();
  std::map<std::string, std::unique_ptr<ActiveRun>> runs;
  {
    std::lock_guard lock(mu_);
    for (auto& [key, run] : runs_) run->stop = true;
    runs.swap(runs_);
  }
  for (auto& [key, run] : runs) {
    if (run->thread.joinable()) run->thread.join();
  }
}

void Platform::loop() {
  while (!stopping_) {
    try {
      step();
    } catch (const std::exception& e) {
      spdlog::error("decision loop: {}", e.what());
    }
    std::unique_lock l(loop_mu_);
    loop_cv_.wait_for(l, config_.tick, [this] { return wake_ || stopping_.load(); });
    wake_ = false;
  }
}

Event Platform::commit_locked(const std::string& kind, const json& payload) {
  Event e{log_->last_seq() + 1, clock_.now(), kind, payload};
  state_.check(e);
  e.seq = log_->append(kind, payload, e.timestamp);
  state_.apply(e);
  return e;
}

void Platform::maybe_snapshot_locked() {
  if (config_.snapshot_every <= 0) return;
  if (state_.applied_seq() - last_snapshot_seq_ < config_.snapshot_every) return;
  log_->write_snapshot(state_.applied_seq(), state_.to_json());
  last_snapshot_seq_ = state_.applied_seq();
}

void Platform::step() {
  const Timestamp now = clock_.now();
  calibration_.tick(now);
  reap();
  std::lock_guard lock(mu_);
  heartbeat_local_locked(now);
  expire_locked(now);
  for (const auto& a : next_decision(state_, now, config_.policy)) {
    auto p = events::transition(a.job_id, JobStatus::Queued, JobStatus::Scheduled);
    p["worker_id"] = a.worker_id;
    commit_locked("job_transition", p);
    launch_locked(a.job_id, a.worker_id);
  }
  maybe_snapshot_locked();
}

void Platform::heartbeat_local_locked(Timestamp now) {
  for (const auto& id : local_workers_) {
    const auto& w = state_.workers().at(id);
    if (now - w.last_heartbeat >= config_.policy.heartbeat_ttl / 3) {
      commit_locked("worker_heartbeat", {{"worker_id", id}});
    }
  }
}

void Platform::expire_locked(Timestamp now) {
  for (const auto& id : orphaned_jobs(state_, now, config_.policy)) {
    const JobRecord& j = state_.job(id);
    json p;
    if (j.status == JobStatus::Scheduled) {
      p = events::transition(id, JobStatus::Scheduled, JobStatus::Queued);
    } else {
      p = failure_transition(j, now,
                             error_json(codes::kWorkerLost, "worker " + j.worker_id + " missed its heartbeat",
                                        {{"worker_id", j.worker_id}}),
                             false, config_.policy);
    }
    p["reason"] = "worker_lost";
    signal_stop_locked(id);
    commit_locked("job_transition", p);
  }
  for (const auto& id : idle_sessions(state_, now)) {
    commit_locked("session_closed", {{"session_id", id}, {"reason", "idle"}});
  }
}

void Platform::signal_stop_locked(const std::string& job_id) {
  for (auto& [key, run] : runs_) {
    if (run->job_id == job_id) run->stop = true;
  }
}

void Platform::launch_locked(const std::string& job_id, const std::string& worker_id) {
  static std::uint64_t serial = 0;
  auto run = std::make_unique<ActiveRun>();
  run->job_id = job_id;
  ActiveRun* raw = run.get();
  run->thread = std::thread([this, raw, worker_id] { run_thread(raw, worker_id); });
  runs_[job_id + "#" + std::to_string(++serial)] = std::move(run);
}

void Platform::reap() {
  std::vector<std::unique_ptr<ActiveRun>> finished;
  {
    std::lock_guard lock(mu_);
    for (auto it = runs_.begin(); it != runs_.end();) {
      if (it->second->done) {
        finished.push_back(std::move(it->second));
        it = runs_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& run : finished) {
    if (run->thread.joinable()) run->thread.join();
  }
}

std::size_t Platform::running_threads() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [key, run] : runs_) n += !run->done;
  return n;
}

void Platform::run_thread(ActiveRun* run, std::string worker_id) {
  const std::string id = run->job_id;
  JobRecord job;
  int generation = 0;
  {
    std::lock_guard lock(mu_);
    const JobRecord* j = state_.find_job(id);
    if (run->stop || j == nullptr || j->status != JobStatus::Scheduled || j->worker_id != worker_id) {
      run->done = true;
      return;
    }
    auto p = events::transition(id, JobStatus::Scheduled, JobStatus::Running);
    p["worker_id"] = worker_id;
    commit_locked("job_transition", p);
    job = state_.job(id);
    generation = job.runs;
  }
  const bool from_scratch = job.checkpoint.is_null() || job.checkpoint.empty();
  auto current_locked = [&] {
    const JobRecord* j = state_.find_job(id);
    return j != nullptr && j->status == JobStatus::Running && j->runs == generation;
  };

  RunContext ctx;
  ctx.adapter = adapters_.at(job.backend_id);
  ctx.calibration = &calibration_;
  ctx.stages = &stages_;
  ctx.clock = &clock_;
  ctx.staleness_limit = config_.staleness_limit;
  ctx.slice = config_.job_slice;
  ctx.poll_interval = std::chrono::milliseconds(20);
  ctx.on_checkpoint = [&](const json& cp, const json& progress) {
    std::lock_guard lock(mu_);
    if (!current_locked()) {
      run->stop = true;
      return;
    }
    commit_locked("job_checkpoint", events::checkpoint(id, cp, progress));
  };
  ctx.should_stop = [&] { return run->stop.load() || stopping_.load(); };

  RunOutcome out;
  try {
    out = run_job(job, ctx);
  } catch (const Error& e) {
    out.kind = RunOutcome::Kind::Failed;
    out.error_code = e.code();
    out.message = e.what();
    out.details = e.details();
    out.permanent = is_permanent_error(e.code());
  } catch (const std::exception& e) {
    out.kind = RunOutcome::Kind::Failed;
    out.error_code = codes::kInternal;
    out.message = e.what();
  }

  std::optional<Duration> model_estimate;
  if (out.kind == RunOutcome::Kind::Completed && from_scratch && out.device_time > Duration::zero()) {
    try {
      model_estimate = estimate_job(job.descriptor, parse_items(job.descriptor), caps(job.backend_id), estimator_);
    } catch (const Error&) {
    }
  }

  try {
    std::lock_guard lock(mu_);
    if (out.kind != RunOutcome::Kind::Aborted && current_locked()) {
      switch (out.kind) {
        case RunOutcome::Kind::Completed: {
          if (model_estimate) {
            commit_locked("duration_feedback", {{"backend_id", job.backend_id},
                                                {"estimate_us", model_estimate->count()},
                                                {"observed_us", out.device_time.count()}});
          }
          auto p = events::transition(id, JobStatus::Running, JobStatus::Completed);
          p["results"] = out.results;
          commit_locked("job_transition", p);
          break;
        }
        case RunOutcome::Kind::Yielded: {
          auto p = events::transition(id, JobStatus::Running, JobStatus::Queued);
          p["reason"] = "slice";
          commit_locked("job_transition", p);
          break;
        }
        case RunOutcome::Kind::Failed: {
          spdlog::info("{} failed on {}: {} {}", id, job.backend_id, out.error_code, out.message);
          commit_locked("job_transition",
                        failure_transition(state_.job(id), clock_.now(),
                                           error_json(out.error_code, out.message, out.details), out.permanent,
                                           config_.policy));
          break;
        }
        case RunOutcome::Kind::Aborted:
          break;
      }
    }
  } catch (const std::exception& e) {
    spdlog::error("{}: recording the outcome failed: {}", id, e.what());
  }
  run->done = true;
  {
    std::lock_guard l(loop_mu_);
    wake_ = true;
  }
  loop_cv_.notify_all();
}

const BackendCapabilities& Platform::caps(const std::string& backend_id) const {
  auto it = caps_.find(backend_id);
  if (it == caps_.end()) {
    throw Error(codes::kUnknownBackend, "unknown backend '" + backend_id + "'", {{"backend_id", backend_id}});
  }
  return it->second;
}

AdapterPtr Platform::adapter(const std::string& backend_id) const {
  (void)caps(backend_id);
  return adapters_.at(backend_id);
}

SubmitResult Platform::submit(const std::string& user, const json& descriptor, const std::string& idempotency_key) {
  JobDescriptor d = descriptor_from_json(descriptor);
  if (!d.user.empty() && d.user != user) {
    throw Error(codes::kForbidden, "descriptor user does not match the authenticated user", {{"field", "user"}});
  }
  d.user = user;
  if (!idempotency_key.empty()) {
    std::lock_guard lock(mu_);
    if (auto id = state_.idempotent_job(user, idempotency_key)) return {*id, false};
  }
  check_descriptor(d);
  const auto circuits = parse_items(d);
  check_symbols(d, circuits);

  std::string backend = d.backend_name;
  if (d.session_id) {
    std::lock_guard lock(mu_);
    const Session* s = state_.find_session(*d.session_id);
    if (s == nullptr || s->user != user) {
      throw Error(codes::kUnknownSession, "unknown session '" + *d.session_id + "'", {{"session_id", *d.session_id}});
    }
    if (!s->open) throw Error(codes::kConflict, "session " + s->session_id + " is closed", {{"session_id", s->session_id}});
    if (backend == kAutoBackend) backend = s->backend_id;
    if (backend != s->backend_id) {
      throw Error(codes::kConflict, "session " + s->session_id + " is bound to " + s->backend_id,
                  {{"session_id", s->session_id}, {"backend_id", s->backend_id}});
    }
  }
  if (backend == kAutoBackend) {
    std::vector<BackendCandidate> candidates;
    for (const auto& [id, c] : caps_) {
      BackendCandidate cand;
      cand.caps = c;
      try {
        cand.calibration = calibration_.latest(id);
      } catch (const Error&) {
        try {
          cand.calibration = calibration_.poll(id);
        } catch (const Error&) {
          continue;
        }
      }
      candidates.push_back(std::move(cand));
    }
    {
      std::lock_guard lock(mu_);
      for (auto& cand : candidates) {
        for (const auto& [jid, j] : state_.jobs()) {
          if (j.backend_id == cand.caps.backend_id && is_active(j.status)) cand.eta += j.estimate;
        }
      }
    }
    backend = select_backend(circuits, candidates);
  }
  const BackendCapabilities& c = caps(backend);
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    if (circuits[i].num_qubits() > c.num_qubits) {
      throw Error(codes::kTooManyQubits,
                  "item " + std::to_string(i) + " needs " + std::to_string(circuits[i].num_qubits()) +
                      " qubits; " + backend + " has " + std::to_string(c.num_qubits),
                  {{"item", i}, {"backend_id", backend}});
    }
    if (d.items[i].shots > c.max_shots) {
      throw Error(codes::kInvalidShots, "shots exceed the backend maximum",
                  {{"item", i}, {"max_shots", c.max_shots}});
    }
  }

  JobRecord r;
  {
    std::lock_guard lock(mu_);
    if (!idempotency_key.empty()) {
      if (auto id = state_.idempotent_job(user, idempotency_key)) return {*id, false};
    }
    const Timestamp now = clock_.now();
    r.required_stages = required_stages(d);
    check_admission(state_, user, backend, r.required_stages, now, config_.policy);
    r.job_id = state_.next_job_id();
    r.backend_id = backend;
    r.estimate = estimate_job(d, circuits, c, estimator_, state_.duration_factor(backend));
    r.seed = d.seed.value_or(derive_seed({config_.fleet_seed, hash_string(r.job_id),
                                          static_cast<std::uint64_t>(now.time_since_epoch().count())}));
    r.idempotency_key = idempotency_key;
    r.descriptor = std::move(d);
    commit_locked("job_submitted", events::job_submitted(r));
  }
  {
    std::lock_guard l(loop_mu_);
    wake_ = true;
  }
  loop_cv_.notify_all();
  return {r.job_id, true};
}

const JobRecord& Platform::owned_job_locked(const std::string& user, const std::string& job_id) const {
  const JobRecord* j = state_.find_job(job_id);
  if (j == nullptr || j->user() != user) {
    throw Error(codes::kUnknownJob, "unknown job '" + job_id + "'", {{"job_id", job_id}});
  }
  return *j;
}

json Platform::status_json_locked(const JobRecord& j, Timestamp now) const {
  json eta_seconds = nullptr;
  json completion = nullptr;
  if (j.status == JobStatus::Queued || j.status == JobStatus::Scheduled) {
    const Duration wait = eta(state_, j.job_id, now);
    eta_seconds = to_seconds(wait);
    completion = to_iso8601(now + wait + j.estimate);
  } else if (j.status == JobStatus::Running) {
    eta_seconds = 0.0;
    completion = to_iso8601(std::max(now, j.started.value_or(now) + j.estimate));
  }
  return {{"job_id", j.job_id},
          {"user", j.user()},
          {"kind", to_string(j.descriptor.kind)},
          {"status", to_string(j.status)},
          {"backend_id", j.backend_id},
          {"priority", j.descriptor.priority},
          {"session_id", j.descriptor.session_id ? json(*j.descriptor.session_id) : json(nullptr)},
          {"attempts", j.attempts},
          {"max_retries", j.descriptor.max_retries},
          {"submitted", to_iso8601(j.submitted)},
          {"started", optional_time(j.started)},
          {"finished", optional_time(j.finished)},
          {"estimate_seconds", to_seconds(j.estimate)},
          {"eta_seconds", eta_seconds},
          {"estimated_completion", completion},
          {"progress", j.progress.is_null() ? json::object() : j.progress},
          {"error", j.error.is_null() ? json(nullptr) : j.error}};
}

json Platform::cancel(const std::string& user, const std::string& job_id) {
  std::lock_guard lock(mu_);
  const JobRecord& j = owned_job_locked(user, job_id);
  switch (j.status) {
    case JobStatus::Queued:
    case JobStatus::Scheduled: {
      auto p = events::transition(job_id, j.status, JobStatus::Cancelled);
      p["reason"] = "cancel";
      signal_stop_locked(job_id);
      commit_locked("job_transition", p);
      break;
    }
    case JobStatus::Running: {
      auto p = events::transition(job_id, JobStatus::Running, JobStatus::Queued);
      p["reason"] = "cancel";
      signal_stop_locked(job_id);
      commit_locked("job_transition", p);
      p = events::transition(job_id, JobStatus::Queued, JobStatus::Cancelled);
      p["reason"] = "cancel";
      commit_locked("job_transition", p);
      break;
    }
    default:
      break;
  }
  return status_json_locked(state_.job(job_id), clock_.now());
}

json Platform::job_status(const std::string& user, const std::string& job_id) const {
  std::lock_guard lock(mu_);
  return status_json_locked(owned_job_locked(user, job_id), clock_.now());
}

json Platform::job_results(const std::string& user, const std::string& job_id) const {
  std::lock_guard lock(mu_);
  const JobRecord& j = owned_job_locked(user, job_id);
  switch (j.status) {
    case JobStatus::Completed:
      return {{"job_id", j.job_id}, {"status", to_string(j.status)}, {"backend_id", j.backend_id}, {"results", j.results}};
    case JobStatus::Failed:
      throw Error(codes::kJobFailed, "job " + job_id + " failed", {{"job_id", job_id}, {"error", j.error}});
    case JobStatus::Cancelled:
      throw Error(codes::kJobCancelled, "job " + job_id + " was cancelled", {{"job_id", job_id}});
    default:
      throw Error(codes::kNotReady, "job " + job_id + " is " + std::string(to_string(j.status)),
                  {{"job_id", job_id}, {"status", to_string(j.status)}});
  }
}

json Platform::list_jobs(const std::string& user) const {
  std::lock_guard lock(mu_);
  const Timestamp now = clock_.now();
  json out = json::array();
  for (const auto& [id, j] : state_.jobs()) {
    if (j.user() == user) out.push_back(status_json_locked(j, now));
  }
  return out;
}

json Platform::open_session(const std::string& user, const std::string& backend_id, std::optional<Duration> ttl) {
  (void)caps(backend_id);
  if (ttl && *ttl <= Duration::zero()) throw Error(codes::kInvalidArgument, "ttl must be positive");
  std::lock_guard lock(mu_);
  Session s;
  s.session_id = state_.next_session_id();
  s.user = user;
  s.backend_id = backend_id;
  s.ttl = ttl.value_or(kDefaultSessionTtl);
  commit_locked("session_opened", events::session_opened(s));
  return to_json(*state_.find_session(s.session_id));
}

json Platform::close_session(const std::string& user, const std::string& session_id) {
  std::lock_guard lock(mu_);
  const Session* s = state_.find_session(session_id);
  if (s == nullptr || s->user != user) {
    throw Error(codes::kUnknownSession, "unknown session '" + session_id + "'", {{"session_id", session_id}});
  }
  if (s->open) commit_locked("session_closed", {{"session_id", session_id}, {"reason", "closed"}});
  return to_json(*state_.find_session(session_id));
}

json Platform::session(const std::string& user, const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const Session* s = state_.find_session(session_id);
  if (s == nullptr || s->user != user) {
    throw Error(codes::kUnknownSession, "unknown session '" + session_id + "'", {{"session_id", session_id}});
  }
  return to_json(*s);
}

json Platform::reserve(const std::string& user, const std::string& backend_id, Timestamp start, Duration duration) {
  (void)caps(backend_id);
  if (duration <= Duration::zero()) {
    throw Error(codes::kInvalidArgument, "duration must be positive", {{"field", "duration_minutes"}});
  }
  std::lock_guard lock(mu_);
  const Timestamp now = clock_.now();
  if (start <= now) {
    throw Error(codes::kInvalidArgument, "reservation start must be in the future",
                {{"field", "start"}, {"now", to_iso8601(now)}});
  }
  if (auto other = reservation_conflict(state_, backend_id, start, duration)) {
    throw Error(codes::kConflict, "overlaps reservation " + *other, {{"reservation_id", *other}});
  }
  Reservation r;
  r.reservation_id = state_.next_reservation_id();
  r.backend_id = backend_id;
  r.user = user;
  r.start = start;
  r.duration = duration;
  commit_locked("reservation_created", events::reservation_created(r));
  return reservation_json(r, now);
}

json Platform::reservations() const {
  std::lock_guard lock(mu_);
  const Timestamp now = clock_.now();
  json out = json::array();
  for (const auto& [id, r] : state_.reservations()) out.push_back(reservation_json(r, now));
  return out;
}

json Platform::backends() const {
  std::map<std::string, json> calibration_ts;
  for (const auto& [id, c] : caps_) {
    try {
      calibration_ts[id] = to_iso8601(calibration_.latest(id).timestamp);
    } catch (const Error&) {
      calibration_ts[id] = nullptr;
    }
  }
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& [id, c] : caps_) {
    json b = to_json(c);
    int queued = 0;
    for (const auto& [jid, j] : state_.jobs()) queued += j.backend_id == id && j.status == JobStatus::Queued;
    const JobRecord* running = state_.occupant(id);
    b["queued_jobs"] = queued;
    b["running_job"] = running ? json(running->job_id) : json(nullptr);
    b["calibration_timestamp"] = calibration_ts[id];
    b["duration_factor"] = state_.duration_factor(id);
    out.push_back(b);
  }
  return out;
}

json Platform::calibration(const std::string& backend_id, bool refresh) {
  (void)caps(backend_id);
  if (refresh) return to_json(calibration_.poll(backend_id));
  try {
    return to_json(calibration_.latest(backend_id));
  } catch (const Error& e) {
    if (e.code() != codes::kNoData) throw;
  }
  return to_json(calibration_.poll(backend_id));
}

json Platform::register_worker(const WorkerInfo& worker) {
  if (worker.worker_id.empty()) throw Error(codes::kInvalidArgument, "worker_id is empty", {{"field", "worker_id"}});
  if (worker.max_parallel < 1) {
    throw Error(codes::kInvalidArgument, "max_parallel must be >= 1", {{"field", "max_parallel"}});
  }
  for (const auto& s : worker.stages) {
    if (!stages_.contains(s)) throw Error(codes::kUnknownStage, "unknown stage '" + s + "'", {{"stage", s}});
  }
  for (const auto& b : worker.backends) (void)caps(b);
  std::lock_guard lock(mu_);
  commit_locked("worker_registered", events::worker_registered(worker));
  return to_json(state_.workers().at(worker.worker_id));
}

json Platform::heartbeat(const std::string& worker_id) {
  std::lock_guard lock(mu_);
  commit_locked("worker_heartbeat", {{"worker_id", worker_id}});
  return to_json(state_.workers().at(worker_id));
}

std::int64_t Platform::last_seq() const {
  std::lock_guard lock(mu_);
  return state_.applied_seq();
}

SchedulerState Platform::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

}  // namespace qrt
