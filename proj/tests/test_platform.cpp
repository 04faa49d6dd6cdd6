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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>

#include "qrt/backend/simulated_device.hpp"
#include "qrt/core/error.hpp"
#include "qrt/platform/platform.hpp"

using namespace qrt;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

const Timestamp kT0 = parse_iso8601("2026-06-01T08:00:00Z");

constexpr const char* kBell =
    "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];";
constexpr const char* kRx = "qreg q[1]; creg c[1]; input float theta; rx(theta) q[0]; measure q[0] -> c[0];";

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qrt-platform-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

PlatformConfig test_config(const std::string& name) {
  PlatformConfig c;
  c.data_dir = fresh_dir(name).string();
  c.noiseless = true;
  c.drift = false;
  c.dilation_us_per_ns_shot = 0.0;
  c.fsync = false;
  c.snapshot_every = 50;
  return c;
}

json bell_job(std::int64_t shots = 1000) {
  return {{"kind", "single"}, {"backend_name", "sim-linear-5"}, {"items", {{{"circuit", kBell}, {"shots", shots}}}}};
}

json hybrid_job(int iterations) {
  return {{"kind", "hybrid"},
          {"backend_name", "sim-linear-5"},
          {"seed", 99},
          {"items", {{{"circuit", kRx}, {"shots", 256}, {"observable", "Z"}}}},
          {"hybrid", {{"initial_params", {{"theta", 0.3}}}, {"iterations", iterations}}}};
}

bool drive(Platform& p, const std::function<bool()>& done, std::chrono::milliseconds limit = 20s) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    p.step();
    if (done()) return true;
    std::this_thread::sleep_for(1ms);
  }
  return false;
}

std::string status_of(const Platform& p, const std::string& user, const std::string& id) {
  return p.job_status(user, id).at("status").get<std::string>();
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("config text, environment overrides and validation") {
  const auto values = parse_config_text(
      "# comment\nport = 9000\n[scheduler]\nuser_limit = 3 # trailing\n[fleet]\ndevices = \"a:line:3, b:ring:4\"\n");
  CHECK(values.at("port") == "9000");
  CHECK(values.at("scheduler.user_limit") == "3");
  auto c = config_from_values(values);
  CHECK(c.port == 9000);
  CHECK(c.policy.user_limit == 3);
  REQUIRE(c.fleet.size() == 2);
  CHECK(c.fleet[1].backend_id == "b");
  CHECK(c.fleet[1].topology == "ring");
  CHECK(c.fleet[1].num_qubits == 4);

  CHECK(env_name("scheduler.user_limit") == "QRUNTIME_SCHEDULER_USER_LIMIT");
  ::setenv("QRUNTIME_SCHEDULER_USER_LIMIT", "7", 1);
  auto overridden = values;
  apply_env_overrides(overridden);
  ::unsetenv("QRUNTIME_SCHEDULER_USER_LIMIT");
  CHECK(config_from_values(overridden).policy.user_limit == 7);

  CHECK(code_of([] { (void)config_from_values({{"nope", "1"}}); }) == codes::kInvalidArgument);
  CHECK(code_of([] { (void)config_from_values({{"port", "eighty"}}); }) == codes::kInvalidArgument);
  CHECK(code_of([] { (void)parse_config_text("[broken\n"); }) == codes::kInvalidArgument);
  CHECK(code_of([] { (void)parse_config_text("no equals sign\n"); }) == codes::kInvalidArgument);
}

TEST_CASE("a Bell job runs end to end") {
  SystemClock clock;
  Platform p(test_config("bell"), clock);
  const auto sub = p.submit("alice", bell_job(2000));
  CHECK(sub.created);
  CHECK(status_of(p, "alice", sub.job_id) == "QUEUED");
  REQUIRE(drive(p, [&] { return status_of(p, "alice", sub.job_id) == "COMPLETED"; }));

  const auto res = p.job_results("alice", sub.job_id);
  const auto& counts = res["results"]["items"][0]["counts"]["counts"];
  std::int64_t total = 0;
  for (const auto& [key, n] : counts.items()) {
    CHECK((key == "00" || key == "11"));
    total += n.get<std::int64_t>();
  }
  CHECK(total == 2000);

  const auto st = p.job_status("alice", sub.job_id);
  CHECK(st["progress"]["completed_items"] == 1);
  CHECK(st["eta_seconds"].is_null());
  CHECK(st["finished"].is_string());
  CHECK(code_of([&] { (void)p.job_status("bob", sub.job_id); }) == codes::kUnknownJob);
  CHECK(p.state().duration_factors().contains("sim-linear-5"));
}

TEST_CASE("submission errors carry stable codes") {
  SystemClock clock;
  auto cfg = test_config("errors");
  cfg.policy.user_limit = 2;
  Platform p(cfg, clock);

  auto unknown_backend = bell_job();
  unknown_backend["backend_name"] = "nowhere";
  CHECK(code_of([&] { p.submit("u", unknown_backend); }) == codes::kUnknownBackend);

  auto unknown_stage = bell_job();
  unknown_stage["items"][0]["execution_options"] = {"option2"};
  CHECK(code_of([&] { p.submit("u", unknown_stage); }) == codes::kCapabilityMissing);

  auto extra_field = bell_job();
  extra_field["colour"] = "blue";
  CHECK(code_of([&] { p.submit("u", extra_field); }) == codes::kSchemaViolation);

  auto syntax = bell_job();
  syntax["items"][0]["circuit"] = "qreg q[2]; hadamard q[0];";
  CHECK_FALSE(code_of([&] { p.submit("u", syntax); }).empty());

  auto unbound = bell_job();
  unbound["items"][0]["circuit"] = kRx;
  CHECK(code_of([&] { p.submit("u", unbound); }) == codes::kUnboundSymbol);

  auto wide = bell_job();
  wide["items"][0]["circuit"] = "qreg q[6]; creg c[6]; h q[5]; measure q[5] -> c[5];";
  CHECK(code_of([&] { p.submit("u", wide); }) == codes::kTooManyQubits);

  auto other_user = bell_job();
  other_user["user"] = "mallory";
  CHECK(code_of([&] { p.submit("u", other_user); }) == codes::kForbidden);

  p.submit("u", bell_job());
  p.submit("u", bell_job());
  CHECK(code_of([&] { p.submit("u", bell_job()); }) == codes::kUserLimitExceeded);
  CHECK_NOTHROW(p.submit("v", bell_job()));
}

TEST_CASE("idempotency keys return the same job") {
  SystemClock clock;
  Platform p(test_config("idem"), clock);
  const auto a = p.submit("u", bell_job(), "key-1");
  const auto b = p.submit("u", bell_job(), "key-1");
  const auto c = p.submit("w", bell_job(), "key-1");
  CHECK(a.created);
  CHECK_FALSE(b.created);
  CHECK(a.job_id == b.job_id);
  CHECK(c.job_id != a.job_id);
}

TEST_CASE("automatic backend choice and sessions") {
  SystemClock clock;
  Platform p(test_config("auto"), clock);
  auto job = bell_job();
  job["backend_name"] = "auto";
  const auto id = p.submit("u", job).job_id;
  const auto backend = p.job_status("u", id)["backend_id"].get<std::string>();
  CHECK((backend == "sim-linear-5" || backend == "sim-ring-7"));

  const auto s = p.open_session("u", "sim-ring-7");
  const auto sid = s["session_id"].get<std::string>();
  auto in_session = bell_job();
  in_session["backend_name"] = "auto";
  in_session["session_id"] = sid;
  const auto jid = p.submit("u", in_session).job_id;
  CHECK(p.job_status("u", jid)["backend_id"] == "sim-ring-7");
  CHECK(p.job_status("u", jid)["session_id"] == sid);

  in_session["backend_name"] = "sim-linear-5";
  CHECK(code_of([&] { p.submit("u", in_session); }) == codes::kConflict);
  CHECK(code_of([&] { p.submit("x", in_session); }) == codes::kUnknownSession);

  CHECK(p.close_session("u", sid)["open"] == false);
  CHECK(p.close_session("u", sid)["open"] == false);
  in_session["backend_name"] = "sim-ring-7";
  CHECK(code_of([&] { p.submit("u", in_session); }) == codes::kConflict);
  CHECK(code_of([&] { p.close_session("u", "ses-999999"); }) == codes::kUnknownSession);
}

TEST_CASE("cancel is idempotent in every state") {
  SystemClock clock;
  Platform p(test_config("cancel"), clock);
  auto device = std::dynamic_pointer_cast<SimulatedDevice>(p.adapter("sim-linear-5"));
  REQUIRE(device);
  device->pause();

  const auto running = p.submit("u", bell_job()).job_id;
  const auto queued = p.submit("u", bell_job()).job_id;
  REQUIRE(drive(p, [&] { return status_of(p, "u", running) == "RUNNING"; }));
  CHECK(status_of(p, "u", queued) == "QUEUED");

  CHECK(p.cancel("u", queued)["status"] == "CANCELLED");
  CHECK(p.cancel("u", running)["status"] == "CANCELLED");
  CHECK(p.cancel("u", running)["status"] == "CANCELLED");
  CHECK(code_of([&] { (void)p.job_results("u", running); }) == codes::kJobCancelled);
  device->resume();
  REQUIRE(drive(p, [&] { return p.running_threads() == 0; }));
  CHECK(status_of(p, "u", running) == "CANCELLED");

  const auto later = p.submit("u", bell_job()).job_id;
  CHECK(code_of([&] { (void)p.job_results("u", later); }) == codes::kNotReady);
  REQUIRE(drive(p, [&] { return status_of(p, "u", later) == "COMPLETED"; }));
  CHECK(p.cancel("u", later)["status"] == "COMPLETED");
}

TEST_CASE("reservations accept, conflict and reject the past") {
  ManualClock clock(kT0);
  Platform p(test_config("reserve"), clock);
  const auto r = p.reserve("u", "sim-linear-5", kT0 + 1h, 15min);
  CHECK(r["reservation_id"] == "res-000001");
  CHECK(r["status"] == "pending");
  CHECK(code_of([&] { p.reserve("v", "sim-linear-5", kT0 + 1h + 10min, 15min); }) == codes::kConflict);
  CHECK_NOTHROW(p.reserve("v", "sim-linear-5", kT0 + 1h + 15min, 15min));
  CHECK_NOTHROW(p.reserve("v", "sim-ring-7", kT0 + 1h, 15min));
  CHECK(code_of([&] { p.reserve("v", "sim-ring-7", kT0 - 1min, 15min); }) == codes::kInvalidArgument);
  CHECK(code_of([&] { p.reserve("v", "sim-ring-7", kT0 + 5h, 0min); }) == codes::kInvalidArgument);
  CHECK(code_of([&] { p.reserve("v", "nowhere", kT0 + 5h, 1min); }) == codes::kUnknownBackend);
  CHECK(p.reservations().size() == 3);
}

TEST_CASE("worker registration, heartbeat and expiry") {
  ManualClock clock(kT0);
  auto cfg = test_config("workers");
  cfg.local_workers = 0;
  Platform p(cfg, clock);

  CHECK(code_of([&] { p.submit("u", bell_job()); }) == codes::kCapabilityMissing);
  CHECK(code_of([&] { p.heartbeat("ghost"); }) == codes::kUnknownWorker);
  WorkerInfo bad;
  bad.worker_id = "ext-1";
  bad.stages = {"teleport"};
  bad.backends = {"sim-linear-5"};
  CHECK(code_of([&] { p.register_worker(bad); }) == codes::kUnknownStage);

  WorkerInfo w;
  w.worker_id = "ext-1";
  w.backends = {"sim-linear-5"};
  p.register_worker(w);
  auto device = std::dynamic_pointer_cast<SimulatedDevice>(p.adapter("sim-linear-5"));
  device->pause();
  const auto id = p.submit("u", bell_job()).job_id;
  REQUIRE(drive(p, [&] { return status_of(p, "u", id) == "RUNNING"; }));

  clock.advance(20s);
  CHECK(p.heartbeat("ext-1")["worker_id"] == "ext-1");
  clock.advance(20s);
  p.step();
  CHECK(status_of(p, "u", id) == "RUNNING");

  clock.advance(31s);
  p.step();
  const auto st = p.job_status("u", id);
  CHECK(st["status"] == "QUEUED");
  CHECK(st["attempts"] == 1);
  CHECK(st["error"]["code"] == codes::kWorkerLost);

  device->resume();
  clock.advance(5s);
  p.register_worker(w);
  REQUIRE(drive(p, [&] { return status_of(p, "u", id) == "COMPLETED"; }));
}

TEST_CASE("a restarted platform resumes interrupted work from its checkpoint") {
  auto reference_cfg = test_config("resume-ref");
  nlohmann::json reference;
  {
    SystemClock clock;
    Platform p(reference_cfg, clock);
    const auto id = p.submit("u", hybrid_job(40)).job_id;
    REQUIRE(drive(p, [&] { return status_of(p, "u", id) == "COMPLETED"; }));
    reference = p.job_results("u", id)["results"];
  }

  auto cfg = test_config("resume");
  cfg.dilation_us_per_ns_shot = 0.005;
  std::string id;
  int checkpoint_at_stop = 0;
  {
    SystemClock clock;
    Platform p(cfg, clock);
    id = p.submit("u", hybrid_job(40)).job_id;
    REQUIRE(drive(p, [&] { return p.job_status("u", id)["progress"].value("iteration", 0) >= 5; }));
    p.stop();
    const auto st = p.job_status("u", id);
    REQUIRE(st["status"] == "RUNNING");
    checkpoint_at_stop = st["progress"]["iteration"].get<int>();
    CHECK(checkpoint_at_stop < 40);
  }
  {
    SystemClock clock;
    Platform p(cfg, clock);
    const auto st = p.job_status("u", id);
    CHECK(st["status"] == "QUEUED");
    CHECK(st["attempts"] == 0);
    CHECK(st["progress"]["iteration"] == checkpoint_at_stop);
    REQUIRE(drive(p, [&] { return status_of(p, "u", id) == "COMPLETED"; }));
    auto results = p.job_results("u", id)["results"];
    results.erase("compilation");
    reference.erase("compilation");
    CHECK(results.dump() == reference.dump());
  }
}

TEST_CASE("state survives a restart through snapshot and log") {
  auto cfg = test_config("replay");
  SchedulerState before;
  {
    ManualClock clock(kT0);
    Platform p(cfg, clock);
    p.reserve("u", "sim-ring-7", kT0 + 2h, 30min);
    p.open_session("u", "sim-linear-5");
    for (int i = 0; i < 3; ++i) p.submit("u", bell_job());
    REQUIRE(drive(p, [&] {
      const auto state = p.state();
      for (const auto& [id, j] : state.jobs()) {
        if (j.status != JobStatus::Completed) return false;
      }
      return true;
    }));
    p.stop();
    before = p.state();
  }
  ManualClock clock(kT0);
  Platform p(cfg, clock);
  CHECK(p.recovered().last_seq == before.applied_seq());
  const auto after = p.state();
  const auto a = after.to_json();
  const auto b = before.to_json();
  CHECK(a["jobs"] == b["jobs"]);
  CHECK(a["reservations"] == b["reservations"]);
  CHECK(a["sessions"] == b["sessions"]);
  CHECK(a["duration_factors"] == b["duration_factors"]);
  CHECK(after.calibrations().at("sim-linear-5").size() == before.calibrations().at("sim-linear-5").size());
}

TEST_CASE("calibration is served and refreshed on demand") {
  ManualClock clock(kT0);
  Platform p(test_config("calibration"), clock);
  const auto first = p.calibration("sim-ring-7", false);
  CHECK(first["backend_id"] == "sim-ring-7");
  clock.advance(1s);
  const auto second = p.calibration("sim-ring-7", true);
  CHECK(second["timestamp"] != first["timestamp"]);
  CHECK(p.calibration("sim-ring-7", false)["timestamp"] == second["timestamp"]);
  CHECK(code_of([&] { p.calibration("nowhere", false); }) == codes::kUnknownBackend);
  CHECK(p.state().calibrations().at("sim-ring-7").size() == 2);
  const auto list = p.backends();
  REQUIRE(list.size() == 2);
  CHECK(list[1]["backend_id"] == "sim-ring-7");
  CHECK(list[1]["coupling_map"].size() == 7);
}
