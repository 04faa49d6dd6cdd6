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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/scheduler/types.hpp"

namespace qrt {

/// Complete optimizer state; persisting this after every iteration is what
/// makes an interrupted run resume bit-for-bit.
struct SpsaState {
  /// Iterations completed.
  int iteration = 0;
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> best_params;
  double best_value = 0.0;
  bool has_best = false;
  std::int64_t evaluations = 0;
  /// Serialized std::mt19937_64 state.
  std::string rng_state;
  nlohmann::json trace = nlohmann::json::array();

  bool operator==(const SpsaState&) const = default;
};

[[nodiscard]] nlohmann::json to_json(const SpsaState& s);
[[nodiscard]] SpsaState spsa_from_json(const nlohmann::json& j);

/// Objective value at a binding; `evaluation` counts from 0 across the run.
using Objective = std::function<double(const ParamBinding& binding, std::int64_t evaluation)>;

[[nodiscard]] SpsaState spsa_start(const HybridConfig& config, std::uint64_t seed);

/// Gain sequences a/(k+1)^0.602 and c/(k+1)^0.101.
[[nodiscard]] double spsa_step_size(const SpsaConfig& config, int k);
[[nodiscard]] double spsa_perturbation(const SpsaConfig& config, int k);

/// One iteration: Δ ∈ {±1}^n from the state's generator, evaluations at
/// θ ± c_k Δ, θ ← θ − a_k (y+ − y−) / (2 c_k) Δ.
void spsa_iterate(SpsaState& state, const SpsaConfig& config, const Objective& objective);

/// Zero-iteration case: one evaluation at the initial point.
void spsa_evaluate_initial(SpsaState& state, const Objective& objective);

[[nodiscard]] ParamBinding to_binding(const std::vector<std::string>& names, const std::vector<double>& values);

}  // namespace qrt
