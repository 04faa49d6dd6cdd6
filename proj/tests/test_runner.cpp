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

#include <cmath>

#include "qrt/backend/simulated_device.hpp"
#include "qrt/scheduler/job_runner.hpp"

using namespace qrt;
using namespace std::chrono_literals;

namespace {

const Timestamp kT0 = parse_iso8601("2026-06-01T08:00:00Z");

constexpr const char* kBell =
    "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];";
constexpr const char* kRx = "qreg q[1]; creg c[1]; input float theta; rx(theta) q[0]; measure q[0] -> c[0];";

struct Rig {
  ManualClock clock{kT0};
  std::vector<std::shared_ptr<SimulatedDevice>> fleet;
  CalibrationManager calibration{clock};
  StageRegistry stages = StageRegistry::with_builtin_stages();
  std::vector<nlohmann::json> checkpoints;
  Duration advance_per_checkpoint{};

  explicit Rig(bool noiseless = true, DriftConfig drift = DriftConfig::none()) {
    FleetOptions o;
    o.noiseless = noiseless;
    o.device.dilation_us_per_ns_shot = 0.0;
    o.device.drift = drift;
    fleet = default_fleet(clock, o);
    for (auto& d : fleet) calibration.add_backend(d);
  }

  RunContext context(std::size_t device = 0) {
    RunContext ctx;
    ctx.adapter = fleet.at(device);
    ctx.calibration = &calibration;
    ctx.stages = &stages;
    ctx.clock = &clock;
    ctx.poll_interval = 5ms;
    ctx.on_checkpoint = [this](const nlohmann::json& cp, const nlohmann::json&) {
      checkpoints.push_back(cp);
      clock.advance(advance_per_checkpoint);
    };
    return ctx;
  }
};

JobRecord job_from(const nlohmann::json& descriptor, std::uint64_t seed = 17) {
  JobRecord r;
  r.job_id = "job-000001";
  r.descriptor = descriptor_from_json(descriptor);
  r.descriptor.user = "u";
  r.backend_id = r.descriptor.backend_name;
  r.seed = seed;
  return r;
}

nlohmann::json hybrid_descriptor(int iterations, std::int64_t shots = 256) {
  return {{"kind", "hybrid"},
          {"backend_name", "sim-linear-5"},
          {"items", {{{"circuit", kRx}, {"shots", shots}, {"observable", "Z"}}}},
          {"hybrid", {{"initial_params", {{"theta", 0.4}}}, {"iterations", iterations}}}};
}

nlohmann::json without_compilation(nlohmann::json results) {
  results.erase("compilation");
  return results;
}

}  // namespace

TEST_CASE("single Bell job on a noiseless device") {
  Rig rig;
  const auto job = job_from({{"kind", "single"},
                             {"backend_name", "sim-linear-5"},
                             {"items", {{{"circuit", kBell}, {"shots", 2000}}}}});
  const auto out = run_job(job, rig.context());
  REQUIRE(out.kind == RunOutcome::Kind::Completed);
  const auto& item = out.results["items"][0];
  std::int64_t total = 0;
  for (const auto& [key, n] : item["counts"]["counts"].items()) {
    CHECK((key == "00" || key == "11"));
    total += n.get<std::int64_t>();
  }
  CHECK(total == 2000);
  CHECK(item["value"].get<double>() == doctest::Approx(1.0));
  CHECK(out.results["compilation"]["template_compilations"] == 1);
  CHECK(out.results["compilation"]["bindings"] == 1);
  CHECK(out.device_time > Duration::zero());
  CHECK(rig.checkpoints.size() == 1);
}

TEST_CASE("batch items checkpoint in order and resume") {
  Rig rig;
  nlohmann::json d{{"kind", "batch"},
                   {"backend_name", "sim-ring-7"},
                   {"items",
                    {{{"circuit", kBell}, {"shots", 100}},
                     {{"circuit", "qreg q[1]; creg c[1]; x q[0]; measure q[0] -> c[0];"}, {"shots", 100}},
                     {{"circuit", kBell}, {"shots", 100}, {"execution_options", {"zne"}}}}}};
  auto job = job_from(d);
  const auto full = run_job(job, rig.context(1));
  REQUIRE(full.kind == RunOutcome::Kind::Completed);
  REQUIRE(full.results["items"].size() == 3);
  CHECK(full.results["items"][1]["value"].get<double>() == doctest::Approx(-1.0));
  CHECK(full.results["items"][2]["metadata"].contains("scale_factors"));
  REQUIRE(rig.checkpoints.size() == 3);
  CHECK(rig.checkpoints[1]["completed_items"] == 2);

  Rig again;
  auto resumed = job;
  resumed.checkpoint = rig.checkpoints[1];
  const auto rest = run_job(resumed, again.context(1));
  REQUIRE(rest.kind == RunOutcome::Kind::Completed);
  CHECK(rest.results["items"] == full.results["items"]);
  CHECK(again.checkpoints.size() == 1);
}

TEST_CASE("hybrid job compiles once and binds twice per iteration") {
  Rig rig;
  const auto out = run_job(job_from(hybrid_descriptor(100, 128)), rig.context());
  REQUIRE(out.kind == RunOutcome::Kind::Completed);
  CHECK(out.results["compilation"]["template_compilations"] == 1);
  CHECK(out.results["compilation"]["recompiles"] == 0);
  CHECK(out.results["compilation"]["bindings"] == 200);
  CHECK(out.results["evaluations"] == 200);
  CHECK(out.results["iterations"] == 100);
  CHECK(out.results["trace"].size() == 100);
  CHECK(rig.checkpoints.size() == 100);
  CHECK(std::cos(out.results["params"]["theta"].get<double>()) < -0.9);
}

TEST_CASE("hybrid with zero iterations returns the initial point") {
  Rig rig;
  const auto out = run_job(job_from(hybrid_descriptor(0, 4000)), rig.context());
  REQUIRE(out.kind == RunOutcome::Kind::Completed);
  CHECK(out.results["params"]["theta"] == 0.4);
  CHECK(out.results["best_params"]["theta"] == 0.4);
  CHECK(out.results["evaluations"] == 1);
  CHECK(out.results["best_value"].get<double>() == doctest::Approx(std::cos(0.4)).epsilon(0.05));
}

TEST_CASE("calibration drift past the staleness limit forces recompilation") {
  DriftConfig drift;
  drift.error_sigma = 0.3;
  Rig rig(false, drift);
  rig.advance_per_checkpoint = 20s;
  auto ctx = rig.context();
  ctx.staleness_limit = 60s;
  const auto out = run_job(job_from(hybrid_descriptor(20, 128)), ctx);
  REQUIRE(out.kind == RunOutcome::Kind::Completed);
  CHECK(out.results["compilation"]["recompiles"].get<int>() >= 1);
  CHECK(out.results["compilation"]["template_compilations"] == 1);
  CHECK(out.results["iterations"] == 20);
  CHECK(rig.calibration.history_size("sim-linear-5") > 1);
}

TEST_CASE("yielding and resuming gives the uninterrupted result") {
  Rig straight(false);
  const auto job = job_from(hybrid_descriptor(12));
  const auto reference = run_job(job, straight.context());
  REQUIRE(reference.kind == RunOutcome::Kind::Completed);

  Rig sliced(false);
  sliced.advance_per_checkpoint = 10s;
  auto ctx = sliced.context();
  ctx.slice = 25s;
  auto current = job;
  RunOutcome out;
  int runs = 0;
  for (; runs < 20; ++runs) {
    out = run_job(current, ctx);
    if (out.kind != RunOutcome::Kind::Yielded) break;
    current.checkpoint = sliced.checkpoints.back();
  }
  REQUIRE(out.kind == RunOutcome::Kind::Completed);
  CHECK(runs == 3);
  CHECK(without_compilation(out.results).dump() == without_compilation(reference.results).dump());
  CHECK(out.results["compilation"]["bindings"] == reference.results["compilation"]["bindings"]);
}

TEST_CASE("permanent and transient failures are told apart") {
  Rig rig;
  nlohmann::json readout{{"name", "readout_mitigation"}, {"config", {{"readout_errors", {0.5, 0.5}}}}};
  nlohmann::json item{{"circuit", kBell}, {"execution_options", nlohmann::json::array({readout})}};
  auto bad = job_from({{"kind", "single"}, {"backend_name", "sim-linear-5"}, {"items", nlohmann::json::array({item})}});
  auto out = run_job(bad, rig.context());
  CHECK(out.kind == RunOutcome::Kind::Failed);
  CHECK(out.error_code == codes::kSingularConfusion);
  CHECK(out.permanent);

  auto syntax = job_from({{"kind", "single"}, {"backend_name", "sim-linear-5"}, {"items", {{{"circuit", "qreg q[1]; h q[5];"}}}}});
  out = run_job(syntax, rig.context());
  CHECK(out.kind == RunOutcome::Kind::Failed);
  CHECK(out.permanent);

  rig.fleet[0]->inject_failures(1);
  out = run_job(job_from({{"kind", "single"}, {"backend_name", "sim-linear-5"}, {"items", {{{"circuit", kBell}}}}}),
                rig.context());
  CHECK(out.kind == RunOutcome::Kind::Failed);
  CHECK(out.error_code == codes::kExecutionFailed);
  CHECK_FALSE(out.permanent);

  rig.fleet[0]->set_available(false);
  out = run_job(job_from({{"kind", "single"}, {"backend_name", "sim-linear-5"}, {"items", {{{"circuit", kBell}}}}}),
                rig.context());
  CHECK(out.error_code == codes::kAdapterUnavailable);
  CHECK_FALSE(out.permanent);
}

TEST_CASE("a stop request abandons the run") {
  Rig rig;
  rig.fleet[0]->pause();
  auto ctx = rig.context();
  int polls = 0;
  ctx.should_stop = [&] { return ++polls > 3; };
  const auto out = run_job(job_from({{"kind", "single"}, {"backend_name", "sim-linear-5"}, {"items", {{{"circuit", kBell}}}}}),
                           ctx);
  CHECK(out.kind == RunOutcome::Kind::Aborted);
  rig.fleet[0]->resume();
}

TEST_CASE("unknown stage fails permanently") {
  Rig rig;
  const auto out = run_job(job_from({{"kind", "single"},
                                     {"backend_name", "sim-linear-5"},
                                     {"items", {{{"circuit", kBell}, {"execution_options", {"nope"}}}}}}),
                           rig.context());
  CHECK(out.error_code == codes::kUnknownStage);
  CHECK(out.permanent);
}
