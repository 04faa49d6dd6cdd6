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

#include "qrt/backend/statevector.hpp"

#include <string>

namespace qrt {

Statevector simulate_statevector(const Circuit& circuit) {
  if (circuit.num_qubits() > kMaxSimulatedQubits) {
    throw Error(codes::kTooLarge, "statevector simulation is limited to " +
                                      std::to_string(kMaxSimulatedQubits) + " qubits");
  }
  if (!circuit.symbols().empty()) {
    throw Error(codes::kUnboundSymbol, "circuit has unbound symbols",
                {{"symbol", *circuit.symbols().begin()}});
  }
  Statevector psi = Statevector::Zero(Eigen::Index(1) << circuit.num_qubits());
  psi(0) = 1.0;
  for (const auto& inst : circuit.instructions()) apply_instruction(psi, inst);
  return psi;
}

double distance_up_to_phase(const Statevector& a, const Statevector& b) {
  Eigen::Index pivot = 0;
  a.cwiseAbs().maxCoeff(&pivot);
  std::complex<double> phase = 1.0;
  if (std::abs(b(pivot)) > 0.0 && std::abs(a(pivot)) > 0.0) {
    phase = (a(pivot) / b(pivot));
    phase /= std::abs(phase);
  }
  return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace qrt
