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

#include "qrt/circuit/validate.hpp"

#include <algorithm>
#include <set>

namespace qrt {

std::vector<Violation> validate(const Circuit& circuit, const BackendCapabilities& caps) {
  std::vector<Violation> out;
  if (circuit.num_qubits() > caps.num_qubits) {
    out.push_back({Violation::Kind::TooManyQubits,
                   std::to_string(circuit.num_qubits()) + " > " + std::to_string(caps.num_qubits), false});
    return out;
  }
  std::set<std::string> reported;
  std::set<CouplingEdge> uncoupled;
  for (const auto& inst : circuit.instructions()) {
    if (!is_unitary(inst.gate)) continue;
    const std::string name(gate_name(inst.gate));
    if (!caps.basis_gates.contains(name) && reported.insert(name).second) {
      out.push_back({Violation::Kind::NonBasisGate, name, true});
    }
    if (inst.qubits.size() == 2 && !caps.coupled(inst.qubits[0], inst.qubits[1])) {
      const auto [a, b] = std::minmax(inst.qubits[0], inst.qubits[1]);
      if (uncoupled.insert({a, b}).second) {
        out.push_back({Violation::Kind::UncoupledPair,
                       std::to_string(a) + "-" + std::to_string(b), true});
      }
    }
  }
  return out;
}

bool has_too_many_qubits(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.kind == Violation::Kind::TooManyQubits; });
}

}  // namespace qrt
