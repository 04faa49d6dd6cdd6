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
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qrt/backend/sampler.hpp"
#include "qrt/calibration/snapshot.hpp"
#include "qrt/transpiler/capabilities.hpp"
#include "qrt/transpiler/transpiler.hpp"

namespace qrt {

enum class HandleStatus { Waiting, Running, Done, Failed };

[[nodiscard]] std::string_view to_string(HandleStatus s);

/// Uniform hardware-adapter contract. Real-device adapters implement the same
/// interface; the platform never talks to a device any other way.
class BackendAdapter {
 public:
  virtual ~BackendAdapter() = default;

  [[nodiscard]] virtual BackendCapabilities capabilities() const = 0;
  /// Current device characterization. Throws ADAPTER_UNAVAILABLE when the
  /// device cannot be reached.
  [[nodiscard]] virtual CalibrationSnapshot calibration() = 0;
  /// Queues a payload and returns its handle.
  virtual std::string submit(const ExecutablePayload& payload) = 0;
  /// Throws UNKNOWN_HANDLE.
  [[nodiscard]] virtual HandleStatus status(const std::string& handle) const = 0;
  /// Throws UNKNOWN_HANDLE, NOT_READY before completion, EXECUTION_FAILED for
  /// failed payloads.
  [[nodiscard]] virtual Counts results(const std::string& handle) = 0;
  /// Payloads submitted but not yet running.
  [[nodiscard]] virtual std::size_t queue_depth() const = 0;

  /// Blocks until the handle is terminal or the timeout passes; returns the
  /// last observed status. The default polls `status`.
  virtual HandleStatus wait(const std::string& handle, std::chrono::milliseconds timeout);
};

using AdapterPtr = std::shared_ptr<BackendAdapter>;

}  // namespace qrt
