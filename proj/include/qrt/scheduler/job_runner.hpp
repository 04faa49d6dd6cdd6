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

#include <chrono>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "qrt/backend/adapter.hpp"
#include "qrt/calibration/manager.hpp"
#include "qrt/pipeline/pipeline.hpp"
#include "qrt/scheduler/types.hpp"
#include "qrt/transpiler/transpiler.hpp"

namespace qrt {

struct RunContext {
  AdapterPtr adapter;
  CalibrationManager* calibration = nullptr;
  const StageRegistry* stages = nullptr;
  const Clock* clock = nullptr;
  Duration staleness_limit = kDefaultStalenessLimit;
  /// After this much time in one run the job yields at its next checkpoint
  /// and is requeued. Zero disables yielding.
  Duration slice{};
  std::chrono::milliseconds poll_interval{50};
  /// Receives (checkpoint, progress) after every item or iteration.
  std::function<void(const nlohmann::json&, const nlohmann::json&)> on_checkpoint;
  /// Polled while waiting on the device; true abandons the run.
  std::function<bool()> should_stop;
};

struct RunOutcome {
  enum class Kind { Completed, Yielded, Failed, Aborted };
  Kind kind = Kind::Completed;
  nlohmann::json results;
  std::string error_code;
  std::string message;
  nlohmann::json details = nlohmann::json::object();
  /// Failure that a retry cannot fix.
  bool permanent = false;
  /// Estimated device time of everything this run executed.
  Duration device_time{};
};

/// Error codes that fail a job without retrying.
[[nodiscard]] bool is_permanent_error(const std::string& code);

/// Executes (or resumes from `job.checkpoint`) one job on one adapter.
/// Each item is compiled once into a template; every evaluation binds it
/// against fresh calibration, runs it through the item's stage chain and
/// submits each resulting circuit with its own derived seed.
[[nodiscard]] RunOutcome run_job(const JobRecord& job, const RunContext& ctx);

}  // namespace qrt
