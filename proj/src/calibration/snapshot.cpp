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

#include "qrt/calibration/snapshot.hpp"

#include <algorithm>

#include "qrt/core/error.hpp"

namespace qrt {

GateKey GateKey::make(std::string gate, std::vector<int> qubits) {
  std::sort(qubits.begin(), qubits.end());
  return GateKey{std::move(gate), std::move(qubits)};
}

double CalibrationSnapshot::gate_error(const std::string& gate, const std::vector<int>& qs) const {
  auto it = gates.find(GateKey::make(gate, qs));
  return it == gates.end() ? 0.0 : it->second.error_rate;
}

double CalibrationSnapshot::readout_error(int qubit) const {
  if (qubit < 0 || static_cast<std::size_t>(qubit) >= qubits.size()) return 0.0;
  return qubits[qubit].readout_error;
}

void CalibrationSnapshot::check() const {
  auto bad = [&](const std::string& what) {
    throw Error(codes::kInvalidArgument, "calibration for " + backend_id + ": " + what);
  };
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    const auto& q = qubits[i];
    if (q.t2_us > 2.0 * q.t1_us) bad("t2 > 2*t1 on qubit " + std::to_string(i));
    if (!(q.readout_error >= 0.0 && q.readout_error < 1.0)) bad("readout error outside [0,1)");
  }
  for (const auto& [key, g] : gates) {
    if (!(g.error_rate >= 0.0 && g.error_rate < 1.0)) bad("gate error outside [0,1) for " + key.gate);
  }
}

nlohmann::json to_json(const CalibrationSnapshot& snap) {
  nlohmann::json qubits = nlohmann::json::array();
  for (const auto& q : snap.qubits) {
    qubits.push_back({{"t1_us", q.t1_us},
                      {"t2_us", q.t2_us},
                      {"frequency_ghz", q.frequency_ghz},
                      {"readout_error", q.readout_error}});
  }
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& [key, g] : snap.gates) {
    gates.push_back({{"gate", key.gate},
                     {"qubits", key.qubits},
                     {"error_rate", g.error_rate},
                     {"duration_ns", g.duration_ns}});
  }
  return {{"backend_id", snap.backend_id},
          {"timestamp", to_iso8601(snap.timestamp)},
          {"qubits", std::move(qubits)},
          {"gates", std::move(gates)}};
}

CalibrationSnapshot calibration_from_json(const nlohmann::json& j) {
  try {
    CalibrationSnapshot snap;
    snap.backend_id = j.at("backend_id").get<std::string>();
    snap.timestamp = parse_iso8601(j.at("timestamp").get<std::string>());
    for (const auto& q : j.at("qubits")) {
      snap.qubits.push_back({q.at("t1_us").get<double>(), q.at("t2_us").get<double>(),
                             q.at("frequency_ghz").get<double>(), q.at("readout_error").get<double>()});
    }
    for (const auto& g : j.at("gates")) {
      snap.gates[GateKey::make(g.at("gate").get<std::string>(), g.at("qubits").get<std::vector<int>>())] =
          GateCalibration{g.at("error_rate").get<double>(), g.at("duration_ns").get<double>()};
    }
    return snap;
  } catch (const nlohmann::json::exception& e) {
    throw Error(codes::kSchemaViolation, std::string("malformed calibration: ") + e.what());
  }
}

}  // namespace qrt
