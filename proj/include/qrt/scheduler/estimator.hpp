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

#include <memory>
#include <string>
#include <vector>

#include "qrt/calibration/snapshot.hpp"
#include "qrt/circuit/circuit.hpp"
#include "qrt/scheduler/types.hpp"
#include "qrt/transpiler/capabilities.hpp"

namespace qrt {

inline constexpr Duration kExecutionOverhead = std::chrono::microseconds(10);

/// How long one circuit with `shots` shots occupies a backend. Replaceable.
class ResourceEstimator {
 public:
  virtual ~ResourceEstimator() = default;
  [[nodiscard]] virtual Duration estimate(const Circuit& circuit, std::int64_t shots,
                                          const BackendCapabilities& caps) const = 0;
};

/// shots x (Σ gate durations + readout) + fixed overhead, rounded up to 1 µs.
/// Gates outside the basis are costed after decomposition.
class DefaultResourceEstimator final : public ResourceEstimator {
 public:
  [[nodiscard]] Duration estimate(const Circuit& circuit, std::int64_t shots,
                                  const BackendCapabilities& caps) const override;
};

/// Circuit executions per evaluation implied by a stage list (ZNE runs one
/// per scale, calibrated readout mitigation adds two preparation runs).
[[nodiscard]] int executions_per_evaluation(const std::vector<StageSpec>& stages);

/// Evaluations of the one item of a hybrid job: two per iteration, or one.
[[nodiscard]] int hybrid_evaluations(const HybridConfig& hybrid);

/// Whole-job estimate scaled by the backend's learned correction factor.
/// `circuits` are the parsed items, in order.
[[nodiscard]] Duration estimate_job(const JobDescriptor& descriptor, const std::vector<Circuit>& circuits,
                                    const BackendCapabilities& caps, const ResourceEstimator& estimator,
                                    double correction = 1.0);

struct BackendCandidate {
  BackendCapabilities caps;
  CalibrationSnapshot calibration;
  /// Expected wait on this backend; tie-breaker after fidelity.
  Duration eta{};
};

/// For backend_name "auto": compiles every item on every candidate and picks
/// the highest estimated fidelity, then the lower eta, then the smaller id.
/// Throws NO_CAPABLE_BACKEND when nothing fits.
[[nodiscard]] std::string select_backend(const std::vector<Circuit>& circuits,
                                         const std::vector<BackendCandidate>& candidates);

}  // namespace qrt
