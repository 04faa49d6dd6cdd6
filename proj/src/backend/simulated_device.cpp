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

#include "qrt/backend/simulated_device.hpp"

#include <algorithm>
#include <cmath>

#include "qrt/core/random.hpp"

namespace qrt {

std::string_view to_string(HandleStatus s) {
  switch (s) {
    case HandleStatus::Waiting: return "waiting";
    case HandleStatus::Running: return "running";
    case HandleStatus::Done: return "done";
    case HandleStatus::Failed: return "failed";
  }
  return "?";
}

HandleStatus BackendAdapter::wait(const std::string& handle, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto s = status(handle);
    if (s == HandleStatus::Done || s == HandleStatus::Failed) return s;
    if (std::chrono::steady_clock::now() >= deadline) return s;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

CalibrationSnapshot drift_step(const CalibrationSnapshot& previous, const DriftConfig& config,
                               std::uint64_t seed, Timestamp t) {
  CalibrationSnapshot next = previous;
  next.timestamp = t;
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(t.time_since_epoch().count())}));
  for (auto& [key, gate] : next.gates) {
    const double g = config.error_sigma * standard_normal(rng);
    if (gate.error_rate == 0.0 || config.error_sigma == 0.0) continue;
    gate.error_rate = std::clamp(gate.error_rate * std::exp(g), kMinDriftedError, kMaxDriftedError);
  }
  if (config.coherence_step == 0.0) return next;
  for (auto& q : next.qubits) {
    q.t1_us *= 1.0 + config.coherence_step * (2.0 * uniform01(rng) - 1.0);
    q.t2_us *= 1.0 + config.coherence_step * (2.0 * uniform01(rng) - 1.0);
    q.t2_us = std::min(q.t2_us, 2.0 * q.t1_us);
  }
  return next;
}

SimulatedDevice::SimulatedDevice(BackendCapabilities caps, CalibrationSnapshot initial, const Clock& clock,
                                 SimulatedDeviceOptions options)
    : caps_(std::move(caps)), clock_(clock), options_(options), truth_(std::move(initial)) {
  caps_.check();
  truth_.check();
  worker_ = std::thread([this] { run(); });
}

SimulatedDevice::~SimulatedDevice() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

BackendCapabilities SimulatedDevice::capabilities() const { return caps_; }

CalibrationSnapshot SimulatedDevice::calibration() {
  std::lock_guard lock(mu_);
  if (!available_) {
    throw Error(codes::kAdapterUnavailable, caps_.backend_id + " is unreachable",
                {{"backend_id", caps_.backend_id}});
  }
  const Timestamp now = clock_.now();
  if (now > truth_.timestamp) truth_ = drift_step(truth_, options_.drift, options_.seed, now);
  return truth_;
}

std::string SimulatedDevice::submit(const ExecutablePayload& payload) {
  if (payload.backend_id != caps_.backend_id) {
    throw Error(codes::kInvalidArgument, "payload is bound for " + payload.backend_id);
  }
  if (!payload.circuit.symbols().empty()) {
    throw Error(codes::kUnboundSymbol, "payload circuit still has symbols");
  }
  if (payload.shots < 1 || payload.shots > caps_.max_shots) {
    throw Error(codes::kInvalidShots, "shots out of range for " + caps_.backend_id);
  }
  std::string handle;
  {
    std::lock_guard lock(mu_);
    if (!available_) {
      throw Error(codes::kAdapterUnavailable, caps_.backend_id + " is unreachable",
                  {{"backend_id", caps_.backend_id}});
    }
    purge_locked(clock_.now());
    handle = caps_.backend_id + "-" + std::to_string(next_handle_++);
    Entry entry;
    entry.payload = payload;
    entries_.emplace(handle, std::move(entry));
    queue_.push_back(handle);
  }
  cv_.notify_all();
  return handle;
}

SimulatedDevice::Entry& SimulatedDevice::find_locked(const std::string& handle) {
  auto it = entries_.find(handle);
  if (it == entries_.end()) {
    throw Error(codes::kUnknownHandle, "unknown handle '" + handle + "'", {{"handle", handle}});
  }
  return it->second;
}

const SimulatedDevice::Entry& SimulatedDevice::find_locked(const std::string& handle) const {
  return const_cast<SimulatedDevice*>(this)->find_locked(handle);
}

HandleStatus SimulatedDevice::status(const std::string& handle) const {
  std::lock_guard lock(mu_);
  return find_locked(handle).status;
}

Counts SimulatedDevice::results(const std::string& handle) {
  std::lock_guard lock(mu_);
  const Timestamp now = clock_.now();
  purge_locked(now);
  auto& e = find_locked(handle);
  switch (e.status) {
    case HandleStatus::Waiting:
    case HandleStatus::Running:
      throw Error(codes::kNotReady, "handle '" + handle + "' is " + std::string(to_string(e.status)),
                  {{"handle", handle}});
    case HandleStatus::Failed:
      throw Error(codes::kExecutionFailed, e.error, {{"handle", handle}});
    case HandleStatus::Done: break;
  }
  if (!e.fetched_at) e.fetched_at = now;
  return *e.counts;
}

std::size_t SimulatedDevice::queue_depth() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

HandleStatus SimulatedDevice::wait(const std::string& handle, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] {
    const auto s = find_locked(handle).status;
    return s == HandleStatus::Done || s == HandleStatus::Failed;
  });
  return find_locked(handle).status;
}

void SimulatedDevice::set_available(bool available) {
  std::lock_guard lock(mu_);
  available_ = available;
}

void SimulatedDevice::pause() {
  std::lock_guard lock(mu_);
  paused_ = true;
}

void SimulatedDevice::resume() {
  {
    std::lock_guard lock(mu_);
    paused_ = false;
  }
  cv_.notify_all();
}

void SimulatedDevice::inject_failures(int n) {
  std::lock_guard lock(mu_);
  pending_failures_ += n;
}

void SimulatedDevice::set_calibration(CalibrationSnapshot snapshot) {
  snapshot.check();
  std::lock_guard lock(mu_);
  truth_ = std::move(snapshot);
}

CalibrationSnapshot SimulatedDevice::current_calibration() const {
  std::lock_guard lock(mu_);
  return truth_;
}

int SimulatedDevice::max_concurrent_running() const {
  std::lock_guard lock(mu_);
  return max_running_;
}

void SimulatedDevice::purge_locked(Timestamp now) {
  std::erase_if(entries_, [&](const auto& kv) {
    return kv.second.fetched_at && now - *kv.second.fetched_at > options_.result_retention;
  });
}

void SimulatedDevice::run() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return stop_ || (!paused_ && !queue_.empty()); });
    if (stop_) return;
    const std::string handle = queue_.front();
    queue_.pop_front();
    auto& entry = entries_.at(handle);
    entry.status = HandleStatus::Running;
    max_running_ = std::max(max_running_, ++running_);
    const bool fail = pending_failures_ > 0;
    if (fail) --pending_failures_;
    const ExecutablePayload payload = entry.payload;
    const NoiseModel noise = NoiseModel::from_calibration(truth_);
    cv_.notify_all();
    lock.unlock();

    std::optional<Counts> counts;
    std::string error = "injected device failure";
    if (!fail) {
      try {
        counts = simulate_counts(payload.circuit, noise, payload.shots, payload.seed);
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    const double wall_us = options_.dilation_us_per_ns_shot *
                           static_cast<double>(payload.estimated_duration_ns) * static_cast<double>(payload.shots);
    const auto wall = std::min<Duration>(options_.max_job_wall, Duration(static_cast<Duration::rep>(wall_us)));

    lock.lock();
    if (wall.count() > 0) cv_.wait_for(lock, wall, [&] { return stop_; });
    auto& done = entries_.at(handle);
    done.counts = std::move(counts);
    done.status = done.counts ? HandleStatus::Done : HandleStatus::Failed;
    if (!done.counts) done.error = error;
    --running_;
    cv_.notify_all();
  }
}

CalibrationSnapshot synthetic_calibration(const BackendCapabilities& caps, std::uint64_t seed, Timestamp ts,
                                          bool noiseless) {
  Rng rng(derive_seed({seed, hash_string(caps.backend_id)}));
  CalibrationSnapshot cal;
  cal.backend_id = caps.backend_id;
  cal.timestamp = ts;
  auto around = [&](double centre) { return noiseless ? 0.0 : centre * (0.5 + uniform01(rng)); };
  auto duration = [&](const std::string& g) {
    auto it = caps.gate_durations_ns.find(g);
    return it == caps.gate_durations_ns.end() ? 0.0 : static_cast<double>(it->second);
  };
  for (int q = 0; q < caps.num_qubits; ++q) {
    QubitCalibration qc;
    qc.t1_us = 80.0 + 60.0 * uniform01(rng);
    qc.t2_us = qc.t1_us * (0.6 + 0.8 * uniform01(rng));
    qc.frequency_ghz = 4.8 + 0.4 * uniform01(rng);
    qc.readout_error = around(0.02);
    cal.qubits.push_back(qc);
    cal.gates[GateKey::make("rz", {q})] = {0.0, duration("rz")};
    cal.gates[GateKey::make("sx", {q})] = {around(0.0005), duration("sx")};
    cal.gates[GateKey::make("x", {q})] = {around(0.0005), duration("x")};
  }
  for (const auto& [a, b] : caps.coupling) {
    cal.gates[GateKey::make("cx", {a, b})] = {around(0.01), duration("cx")};
  }
  return cal;
}

std::vector<std::shared_ptr<SimulatedDevice>> make_fleet(const Clock& clock, std::vector<BackendCapabilities> devices,
                                                         const FleetOptions& options) {
  std::vector<std::shared_ptr<SimulatedDevice>> fleet;
  for (auto& caps : devices) {
    auto cal = synthetic_calibration(caps, options.seed, clock.now(), options.noiseless);
    auto device_options = options.device;
    device_options.seed = derive_seed({options.seed, hash_string(caps.backend_id)});
    if (options.noiseless) device_options.drift = DriftConfig::none();
    fleet.push_back(std::make_shared<SimulatedDevice>(std::move(caps), std::move(cal), clock, device_options));
  }
  return fleet;
}

std::vector<std::shared_ptr<SimulatedDevice>> default_fleet(const Clock& clock, const FleetOptions& options) {
  return make_fleet(clock, {line_device("sim-linear-5", 5), ring_device("sim-ring-7", 7)}, options);
}

}  // namespace qrt
