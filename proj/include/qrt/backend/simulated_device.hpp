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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "qrt/backend/adapter.hpp"
#include "qrt/core/time.hpp"

namespace qrt {

/// Spread of one calibration drift step.
struct DriftConfig {
  /// Standard deviation of the log-normal factor applied to error rates.
  double error_sigma = 0.05;
  /// Maximum relative change of t1/t2 per step.
  double coherence_step = 0.02;

  static DriftConfig none() { return {0.0, 0.0}; }
};

inline constexpr double kMinDriftedError = 1e-5;
inline constexpr double kMaxDriftedError = 0.5;

/// Next snapshot after one drift step at time `t`. Deterministic per
/// (previous, config, seed, t). Zero error rates stay zero.
[[nodiscard]] CalibrationSnapshot drift_step(const CalibrationSnapshot& previous, const DriftConfig& config,
                                             std::uint64_t seed, Timestamp t);

struct SimulatedDeviceOptions {
  DriftConfig drift;
  std::uint64_t seed = 1;
  /// Wall-clock microseconds per (estimated ns x shot); 0 runs instantly.
  double dilation_us_per_ns_shot = 1.0;
  Duration max_job_wall = std::chrono::seconds(2);
  Duration result_retention = std::chrono::hours(1);
};

/// Seeded noisy-simulator QPU: FIFO queue drained by one executor thread,
/// noise taken from the device's own current calibration, which drifts each
/// time it is read.
class SimulatedDevice final : public BackendAdapter {
 public:
  SimulatedDevice(BackendCapabilities caps, CalibrationSnapshot initial, const Clock& clock,
                  SimulatedDeviceOptions options = {});
  ~SimulatedDevice() override;
  SimulatedDevice(const SimulatedDevice&) = delete;
  SimulatedDevice& operator=(const SimulatedDevice&) = delete;

  [[nodiscard]] BackendCapabilities capabilities() const override;
  [[nodiscard]] CalibrationSnapshot calibration() override;
  std::string submit(const ExecutablePayload& payload) override;
  [[nodiscard]] HandleStatus status(const std::string& handle) const override;
  [[nodiscard]] Counts results(const std::string& handle) override;
  [[nodiscard]] std::size_t queue_depth() const override;
  HandleStatus wait(const std::string& handle, std::chrono::milliseconds timeout) override;

  // Test and operator controls.
  void set_available(bool available);
  void pause();
  void resume();
  /// The next `n` executions fail.
  void inject_failures(int n);
  /// Replaces the device's true calibration (noise follows it immediately).
  void set_calibration(CalibrationSnapshot snapshot);
  [[nodiscard]] CalibrationSnapshot current_calibration() const;
  /// Number of payloads that were ever running at the same time (at most 1).
  [[nodiscard]] int max_concurrent_running() const;

 private:
  struct Entry {
    ExecutablePayload payload;
    HandleStatus status = HandleStatus::Waiting;
    std::optional<Counts> counts;
    std::string error;
    std::optional<Timestamp> fetched_at;
  };

  void run();
  void purge_locked(Timestamp now);
  Entry& find_locked(const std::string& handle);
  const Entry& find_locked(const std::string& handle) const;

  const BackendCapabilities caps_;
  const Clock& clock_;
  const SimulatedDeviceOptions options_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  CalibrationSnapshot truth_;
  std::map<std::string, Entry> entries_;
  std::deque<std::string> queue_;
  std::uint64_t next_handle_ = 1;
  bool available_ = true;
  bool paused_ = false;
  bool stop_ = false;
  int pending_failures_ = 0;
  int running_ = 0;
  int max_running_ = 0;
  std::thread worker_;
};

struct FleetOptions {
  bool noiseless = false;
  std::uint64_t seed = 7;
  SimulatedDeviceOptions device;
};

/// Plausible starting calibration for `caps` (seeded).
[[nodiscard]] CalibrationSnapshot synthetic_calibration(const BackendCapabilities& caps, std::uint64_t seed,
                                                        Timestamp ts, bool noiseless = false);

/// One simulated device per entry, each with its own seeded calibration.
[[nodiscard]] std::vector<std::shared_ptr<SimulatedDevice>> make_fleet(const Clock& clock,
                                                                       std::vector<BackendCapabilities> devices,
                                                                       const FleetOptions& options = {});

/// The default two-device fleet: "sim-linear-5" and "sim-ring-7".
[[nodiscard]] std::vector<std::shared_ptr<SimulatedDevice>> default_fleet(const Clock& clock,
                                                                          const FleetOptions& options = {});

}  // namespace qrt
