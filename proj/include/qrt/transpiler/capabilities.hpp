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
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qrt {

using CouplingEdge = std::pair<int, int>;  // stored with first < second

/// Static description of a device: what it can run and how long things take.
struct BackendCapabilities {
  std::string backend_id;
  int num_qubits = 0;
  std::set<std::string> basis_gates{"rz", "sx", "x", "cx"};
  std::set<CouplingEdge> coupling;
  std::map<std::string, std::int64_t> gate_durations_ns;
  std::int64_t readout_duration_ns = 1000;
  int max_shots = 100000;
  std::int64_t timing_granularity_ns = 1;

  [[nodiscard]] bool coupled(int a, int b) const {
    return coupling.contains(a < b ? CouplingEdge{a, b} : CouplingEdge{b, a});
  }
  [[nodiscard]] std::vector<std::vector<int>> adjacency() const;
  /// Throws Error(INVALID_ARGUMENT) when an invariant is violated.
  void check() const;
};

BackendCapabilities line_device(std::string id, int n);
BackendCapabilities ring_device(std::string id, int n);

}  // namespace qrt
