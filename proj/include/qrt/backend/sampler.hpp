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
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/calibration/snapshot.hpp"
#include "qrt/circuit/circuit.hpp"

namespace qrt {

/// Measured bitstring histogram. Character i from the right of a key is
/// classical bit i; the counts always sum to `shots`.
struct Counts {
  std::map<std::string, std::int64_t> histogram;
  std::int64_t shots = 0;

  [[nodiscard]] std::int64_t operator[](const std::string& key) const {
    auto it = histogram.find(key);
    return it == histogram.end() ? 0 : it->second;
  }
  bool operator==(const Counts&) const = default;
};

nlohmann::json to_json(const Counts& counts);
Counts counts_from_json(const nlohmann::json& j);

/// Depolarizing-trajectory noise: after each gate, with probability p_g a
/// uniformly random non-identity Pauli hits the gate's qubits; each measured
/// bit flips with the qubit's readout error.
struct NoiseModel {
  std::map<GateKey, double> gate_error;
  std::vector<double> readout_error;
  double default_1q = 0.0;
  double default_2q = 0.0;

  static NoiseModel noiseless() { return {}; }
  static NoiseModel from_calibration(const CalibrationSnapshot& cal);

  [[nodiscard]] double gate_probability(const Instruction& inst) const;
  [[nodiscard]] double readout(int qubit) const;
  [[nodiscard]] bool gates_noiseless() const;
};

/// Seeded shot sampler. Deterministic for identical (circuit, noise, shots,
/// seed). Throws TOO_LARGE above kMaxSimulatedQubits, INVALID_SHOTS for
/// shots < 1, UNBOUND_SYMBOL for parametric circuits.
Counts simulate_counts(const Circuit& circuit, const NoiseModel& noise, std::int64_t shots,
                       std::uint64_t seed);

}  // namespace qrt
