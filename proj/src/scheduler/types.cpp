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

#include "qrt/scheduler/types.hpp"

#include <array>

#include "qrt/core/error.hpp"

namespace qrt {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 6> kStatusNames{"QUEUED", "SCHEDULED", "RUNNING",
                                                       "COMPLETED", "FAILED", "CANCELLED"};
constexpr std::array<std::string_view, 3> kKindNames{"single", "batch", "hybrid"};

[[noreturn]] void schema_error(const std::string& field, const std::string& message) {
  throw Error(codes::kSchemaViolation, field + ": " + message, {{"field", field}});
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) schema_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

const json& require(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(where.empty() ? key : where + "." + key, "required");
  return *it;
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) schema_error(field, "must be a string");
  return v.get<std::string>();
}

std::int64_t get_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) schema_error(field, "must be an integer");
  return v.get<std::int64_t>();
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) schema_error(field, "must be a number");
  return v.get<double>();
}

StageSpec stage_from_json(const json& v, const std::string& field) {
  if (v.is_string()) return {v.get<std::string>(), json::object()};
  if (!v.is_object()) schema_error(field, "must be a stage name or {name, config}");
  reject_unknown(v, field, {"name", "config"});
  StageSpec s;
  s.name = get_string(require(v, field, "name"), field + ".name");
  if (auto it = v.find("config"); it != v.end()) {
    if (!it->is_object()) schema_error(field + ".config", "must be an object");
    s.config = *it;
  }
  return s;
}

std::optional<Timestamp> opt_time(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return parse_iso8601(it->get<std::string>());
}

json time_or_null(const std::optional<Timestamp>& t) { return t ? json(to_iso8601(*t)) : json(nullptr); }

}  // namespace

std::string_view to_string(JobStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

JobStatus job_status_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
    if (kStatusNames[i] == s) return static_cast<JobStatus>(i);
  }
  throw Error(codes::kInvalidArgument, "unknown job status '" + std::string(s) + "'");
}

bool is_terminal(JobStatus s) {
  return s == JobStatus::Completed || s == JobStatus::Failed || s == JobStatus::Cancelled;
}

bool is_legal_transition(JobStatus from, JobStatus to) {
  using S = JobStatus;
  switch (from) {
    case S::Queued: return to == S::Scheduled || to == S::Cancelled;
    case S::Scheduled: return to == S::Running || to == S::Queued || to == S::Cancelled;
    case S::Running: return to == S::Completed || to == S::Failed || to == S::Queued;
    default: return false;
  }
}

std::string_view to_string(JobKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

JobKind job_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<JobKind>(i);
  }
  schema_error("kind", "must be one of single, batch, hybrid");
}

json to_json(const JobDescriptor& d) {
  json j;
  if (!d.user.empty()) j["user"] = d.user;
  j["kind"] = to_string(d.kind);
  j["backend_name"] = d.backend_name;
  json items = json::array();
  for (const auto& item : d.items) {
    json opts = json::array();
    for (const auto& s : item.execution_options) {
      if (s.config.empty()) {
        opts.push_back(s.name);
      } else {
        opts.push_back({{"name", s.name}, {"config", s.config}});
      }
    }
    items.push_back(
        {{"circuit", item.circuit}, {"execution_options", opts}, {"shots", item.shots}, {"observable", item.observable}});
  }
  j["items"] = items;
  j["priority"] = d.priority;
  if (d.session_id) j["session_id"] = *d.session_id;
  j["max_retries"] = d.max_retries;
  if (d.seed) j["seed"] = *d.seed;
  if (d.hybrid) {
    j["hybrid"] = {{"initial_params", d.hybrid->initial_params},
                   {"iterations", d.hybrid->iterations},
                   {"spsa", {{"a", d.hybrid->spsa.a}, {"c", d.hybrid->spsa.c}}},
                   {"target", d.hybrid->target}};
  }
  return j;
}

JobDescriptor descriptor_from_json(const json& j) {
  if (!j.is_object()) schema_error("descriptor", "must be an object");
  reject_unknown(j, "", {"user", "kind", "backend_name", "items", "priority", "session_id", "max_retries", "seed",
                         "hybrid"});
  JobDescriptor d;
  if (auto it = j.find("user"); it != j.end()) d.user = get_string(*it, "user");
  if (auto it = j.find("kind"); it != j.end()) d.kind = job_kind_from_string(get_string(*it, "kind"));
  d.backend_name = get_string(require(j, "", "backend_name"), "backend_name");
  const auto& items = require(j, "", "items");
  if (!items.is_array()) schema_error("items", "must be an array");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string where = "items[" + std::to_string(i) + "]";
    const auto& it = items[i];
    if (!it.is_object()) schema_error(where, "must be an object");
    reject_unknown(it, where, {"circuit", "execution_options", "shots", "observable"});
    JobItem item;
    item.circuit = get_string(require(it, where, "circuit"), where + ".circuit");
    if (auto o = it.find("execution_options"); o != it.end()) {
      if (!o->is_array()) schema_error(where + ".execution_options", "must be an array");
      for (std::size_t k = 0; k < o->size(); ++k) {
        item.execution_options.push_back(
            stage_from_json((*o)[k], where + ".execution_options[" + std::to_string(k) + "]"));
      }
    }
    if (auto s = it.find("shots"); s != it.end()) item.shots = get_int(*s, where + ".shots");
    if (auto s = it.find("observable"); s != it.end()) item.observable = get_string(*s, where + ".observable");
    d.items.push_back(std::move(item));
  }
  if (auto it = j.find("priority"); it != j.end()) d.priority = static_cast<int>(get_int(*it, "priority"));
  if (auto it = j.find("session_id"); it != j.end() && !it->is_null()) {
    d.session_id = get_string(*it, "session_id");
  }
  if (auto it = j.find("max_retries"); it != j.end()) {
    d.max_retries = static_cast<int>(get_int(*it, "max_retries"));
  }
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      schema_error("seed", "must be a non-negative integer");
    }
    d.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("hybrid"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) schema_error("hybrid", "must be an object");
    reject_unknown(*it, "hybrid", {"initial_params", "iterations", "spsa", "target"});
    HybridConfig h;
    if (auto p = it->find("initial_params"); p != it->end()) {
      if (!p->is_object()) schema_error("hybrid.initial_params", "must be an object");
      for (const auto& [name, value] : p->items()) h.initial_params[name] = get_number(value, "hybrid.initial_params." + name);
    }
    if (auto n = it->find("iterations"); n != it->end()) h.iterations = static_cast<int>(get_int(*n, "hybrid.iterations"));
    if (auto s = it->find("spsa"); s != it->end()) {
      if (!s->is_object()) schema_error("hybrid.spsa", "must be an object");
      reject_unknown(*s, "hybrid.spsa", {"a", "c"});
      if (auto a = s->find("a"); a != s->end()) h.spsa.a = get_number(*a, "hybrid.spsa.a");
      if (auto c = s->find("c"); c != s->end()) h.spsa.c = get_number(*c, "hybrid.spsa.c");
    }
    if (auto t = it->find("target"); t != it->end()) {
      h.target = get_string(*t, "hybrid.target");
      if (h.target != "minimize") schema_error("hybrid.target", "only \"minimize\" is supported");
    }
    d.hybrid = std::move(h);
  }
  return d;
}

void check_descriptor(const JobDescriptor& d) {
  if (d.backend_name.empty()) throw Error(codes::kInvalidArgument, "backend_name is empty");
  if (d.items.empty()) throw Error(codes::kInvalidArgument, "a job needs at least one item");
  for (const auto& item : d.items) {
    if (item.shots < 1) throw Error(codes::kInvalidShots, "shots must be >= 1", {{"shots", item.shots}});
  }
  if (d.max_retries < 0) throw Error(codes::kInvalidArgument, "max_retries must be >= 0");
  switch (d.kind) {
    case JobKind::Single:
      if (d.items.size() != 1) throw Error(codes::kInvalidArgument, "a single job has exactly one item");
      break;
    case JobKind::Batch:
      break;
    case JobKind::Hybrid:
      if (d.items.size() != 1) throw Error(codes::kInvalidArgument, "a hybrid job has exactly one item");
      if (!d.hybrid) throw Error(codes::kInvalidArgument, "a hybrid job needs a hybrid section");
      if (d.hybrid->iterations < 0) throw Error(codes::kInvalidArgument, "iterations must be >= 0");
      if (!(d.hybrid->spsa.a > 0.0) || !(d.hybrid->spsa.c > 0.0)) {
        throw Error(codes::kInvalidArgument, "spsa a and c must be positive");
      }
      break;
  }
  if (d.kind != JobKind::Hybrid && d.hybrid) throw Error(codes::kInvalidArgument, "hybrid section on a non-hybrid job");
}

std::set<std::string> required_stages(const JobDescriptor& d) {
  std::set<std::string> out;
  for (const auto& item : d.items) {
    for (const auto& s : item.execution_options) out.insert(s.name);
  }
  return out;
}

json to_json(const JobRecord& r) {
  json d = to_json(r.descriptor);
  d["user"] = r.descriptor.user;
  return {{"job_id", r.job_id},
          {"descriptor", d},
          {"backend_id", r.backend_id},
          {"status", to_string(r.status)},
          {"attempts", r.attempts},
          {"runs", r.runs},
          {"submitted", to_iso8601(r.submitted)},
          {"started", time_or_null(r.started)},
          {"finished", time_or_null(r.finished)},
          {"not_before", to_iso8601(r.not_before)},
          {"worker_id", r.worker_id},
          {"estimate_us", r.estimate.count()},
          {"seed", r.seed},
          {"required_stages", r.required_stages},
          {"idempotency_key", r.idempotency_key},
          {"checkpoint", r.checkpoint},
          {"progress", r.progress},
          {"results", r.results},
          {"error", r.error}};
}

JobRecord job_from_json(const json& j) {
  JobRecord r;
  r.job_id = j.at("job_id").get<std::string>();
  r.descriptor = descriptor_from_json(j.at("descriptor"));
  r.backend_id = j.at("backend_id").get<std::string>();
  r.status = job_status_from_string(j.at("status").get<std::string>());
  r.attempts = j.at("attempts").get<int>();
  r.runs = j.at("runs").get<int>();
  r.submitted = parse_iso8601(j.at("submitted").get<std::string>());
  r.started = opt_time(j, "started");
  r.finished = opt_time(j, "finished");
  r.not_before = parse_iso8601(j.at("not_before").get<std::string>());
  r.worker_id = j.at("worker_id").get<std::string>();
  r.estimate = Duration{j.at("estimate_us").get<std::int64_t>()};
  r.seed = j.at("seed").get<std::uint64_t>();
  r.required_stages = j.at("required_stages").get<std::set<std::string>>();
  r.idempotency_key = j.at("idempotency_key").get<std::string>();
  r.checkpoint = j.at("checkpoint");
  r.progress = j.at("progress");
  r.results = j.at("results");
  r.error = j.at("error");
  return r;
}

json to_json(const WorkerInfo& w) {
  return {{"worker_id", w.worker_id},
          {"stages", w.stages},
          {"backends", w.backends},
          {"max_parallel", w.max_parallel},
          {"last_heartbeat", to_iso8601(w.last_heartbeat)}};
}

WorkerInfo worker_from_json(const json& j) {
  WorkerInfo w;
  w.worker_id = j.at("worker_id").get<std::string>();
  w.stages = j.at("stages").get<std::set<std::string>>();
  w.backends = j.at("backends").get<std::set<std::string>>();
  w.max_parallel = j.at("max_parallel").get<int>();
  w.last_heartbeat = parse_iso8601(j.at("last_heartbeat").get<std::string>());
  return w;
}

std::string Reservation::status(Timestamp now) const {
  if (now < start) return "pending";
  return now < end() ? "active" : "expired";
}

json to_json(const Reservation& r) {
  return {{"reservation_id", r.reservation_id},
          {"backend_id", r.backend_id},
          {"user", r.user},
          {"start", to_iso8601(r.start)},
          {"duration_us", r.duration.count()}};
}

Reservation reservation_from_json(const json& j) {
  Reservation r;
  r.reservation_id = j.at("reservation_id").get<std::string>();
  r.backend_id = j.at("backend_id").get<std::string>();
  r.user = j.at("user").get<std::string>();
  r.start = parse_iso8601(j.at("start").get<std::string>());
  r.duration = Duration{j.at("duration_us").get<std::int64_t>()};
  return r;
}

json to_json(const Session& s) {
  return {{"session_id", s.session_id},
          {"user", s.user},
          {"backend_id", s.backend_id},
          {"ttl_us", s.ttl.count()},
          {"opened", to_iso8601(s.opened)},
          {"last_activity", to_iso8601(s.last_activity)},
          {"open", s.open},
          {"close_reason", s.close_reason}};
}

Session session_from_json(const json& j) {
  Session s;
  s.session_id = j.at("session_id").get<std::string>();
  s.user = j.at("user").get<std::string>();
  s.backend_id = j.at("backend_id").get<std::string>();
  s.ttl = Duration{j.at("ttl_us").get<std::int64_t>()};
  s.opened = parse_iso8601(j.at("opened").get<std::string>());
  s.last_activity = parse_iso8601(j.at("last_activity").get<std::string>());
  s.open = j.at("open").get<bool>();
  s.close_reason = j.at("close_reason").get<std::string>();
  return s;
}

}  // namespace qrt
