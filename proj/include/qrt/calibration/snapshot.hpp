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

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/core/time.hpp"

namespace qrt {

struct QubitCalibration {
  double t1_us = 100.0;
  double t2_us = 100.0;
  double frequency_ghz = 5.0;
  double readout_error = 0.0;

  bool operator==(const QubitCalibration&) const = default;
};

/// Gate name plus physical operands. Two-qubit keys are stored with the
/// operands sorted, so (cx, 1, 0) and (cx, 0, 1) refer to the same entry.
struct GateKey {
  std::string gate;
  std::vector<int> qubits;

  static GateKey make(std::string gate, std::vector<int> qubits);
  auto operator<=>(const GateKey&) const = default;
};

struct GateCalibration {
  double error_rate = 0.0;
  double duration_ns = 0.0;

  bool operator==(const GateCalibration&) const = default;
};

struct CalibrationSnapshot {
  std::string backend_id;
  Timestamp timestamp{};
  std::vector<QubitCalibration> qubits;
  std::map<GateKey, GateCalibration> gates;

  /// Error rate for a gate on physical operands; 0 when uncalibrated.
  [[nodiscard]] double gate_error(const std::string& gate, const std::vector<int>& qubits) const;
  [[nodiscard]] double readout_error(int qubit) const;
  /// Throws Error(INVALID_ARGUMENT) when an invariant is violated.
  void check() const;

  bool operator==(const CalibrationSnapshot&) const = default;
};

nlohmann::json to_json(const CalibrationSnapshot& snap);
CalibrationSnapshot calibration_from_json(const nlohmann::json& j);

}  // namespace qrt
