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

#include "qrt/scheduler/estimator.hpp"

#include <cmath>

#include "qrt/core/error.hpp"
#include "qrt/transpiler/transpiler.hpp"

namespace qrt {

Duration DefaultResourceEstimator::estimate(const Circuit& circuit, std::int64_t shots,
                                            const BackendCapabilities& caps) const {
  const auto per_shot = estimate_duration_ns(decompose(circuit, caps.basis_gates), caps);
  const std::int64_t ns = shots * per_shot;
  return Duration{(ns + 999) / 1000} + kExecutionOverhead;
}

int executions_per_evaluation(const std::vector<StageSpec>& stages) {
  int n = 1;
  for (const auto& s : stages) {
    if (s.name == "zne" || s.name == "ErrorMitigatedExecutionBackend") {
      const auto it = s.config.find("scales");
      n *= it != s.config.end() && it->is_array() ? static_cast<int>(it->size()) : 3;
    } else if (s.name == "readout_mitigation" || s.name == "ReadoutMitigatedExecutionBackend") {
      if (!s.config.contains("readout_errors")) n *= 3;
    }
  }
  return n;
}

int hybrid_evaluations(const HybridConfig& hybrid) { return hybrid.iterations == 0 ? 1 : 2 * hybrid.iterations; }

Duration estimate_job(const JobDescriptor& descriptor, const std::vector<Circuit>& circuits,
                      const BackendCapabilities& caps, const ResourceEstimator& estimator, double correction) {
  Duration total{};
  for (std::size_t i = 0; i < descriptor.items.size() && i < circuits.size(); ++i) {
    const auto& item = descriptor.items[i];
    Duration one = estimator.estimate(circuits[i], item.shots, caps);
    one *= executions_per_evaluation(item.execution_options);
    if (descriptor.kind == JobKind::Hybrid && descriptor.hybrid) one *= hybrid_evaluations(*descriptor.hybrid);
    total += one;
  }
  return Duration{static_cast<Duration::rep>(std::ceil(static_cast<double>(total.count()) * correction))};
}

std::string select_backend(const std::vector<Circuit>& circuits, const std::vector<BackendCandidate>& candidates) {
  const BackendCandidate* best = nullptr;
  double best_fidelity = -1.0;
  for (const auto& c : candidates) {
    double fidelity = 1.0;
    try {
      for (const auto& circuit : circuits) {
        const auto tpl = compile_template(circuit, c.caps, c.calibration);
        fidelity *= estimate_fidelity(tpl.routed, c.calibration);
      }
    } catch (const Error&) {
      continue;
    }
    bool better = best == nullptr || fidelity > best_fidelity;
    if (!better && fidelity == best_fidelity) {
      better = c.eta != best->eta ? c.eta < best->eta : c.caps.backend_id < best->caps.backend_id;
    }
    if (better) {
      best = &c;
      best_fidelity = fidelity;
    }
  }
  if (best == nullptr) throw Error(codes::kNoCapableBackend, "no backend can run this job");
  return best->caps.backend_id;
}

}  // namespace qrt
