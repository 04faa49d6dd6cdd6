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

#include "qrt/transpiler/capabilities.hpp"

#include <algorithm>

#include "qrt/core/error.hpp"

namespace qrt {

std::vector<std::vector<int>> BackendCapabilities::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(num_qubits));
  for (const auto& [a, b] : coupling) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

void BackendCapabilities::check() const {
  if (num_qubits < 1) throw Error(codes::kInvalidArgument, backend_id + ": num_qubits must be >= 1");
  for (const auto& [a, b] : coupling) {
    if (a < 0 || b < 0 || a >= num_qubits || b >= num_qubits || a >= b) {
      throw Error(codes::kInvalidArgument, backend_id + ": bad coupling pair");
    }
  }
  for (const auto& [gate, ns] : gate_durations_ns) {
    if (ns <= 0) throw Error(codes::kInvalidArgument, backend_id + ": duration of " + gate + " must be > 0");
  }
  if (readout_duration_ns <= 0 || timing_granularity_ns <= 0) {
    throw Error(codes::kInvalidArgument, backend_id + ": durations must be > 0");
  }
  if (max_shots < 1) throw Error(codes::kInvalidArgument, backend_id + ": max_shots must be >= 1");
}

namespace {

BackendCapabilities base_device(std::string id, int n) {
  BackendCapabilities caps;
  caps.backend_id = std::move(id);
  caps.num_qubits = n;
  caps.gate_durations_ns = {{"rz", 1}, {"sx", 35}, {"x", 35}, {"cx", 300}};
  caps.readout_duration_ns = 1000;
  caps.max_shots = 100000;
  caps.timing_granularity_ns = 1;
  return caps;
}

}  // namespace

BackendCapabilities line_device(std::string id, int n) {
  auto caps = base_device(std::move(id), n);
  for (int i = 0; i + 1 < n; ++i) caps.coupling.insert({i, i + 1});
  return caps;
}

BackendCapabilities ring_device(std::string id, int n) {
  auto caps = line_device(std::move(id), n);
  if (n > 2) caps.coupling.insert({0, n - 1});
  return caps;
}

}  // namespace qrt
