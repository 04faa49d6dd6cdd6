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

#include <string>
#include <vector>

#include "qrt/circuit/circuit.hpp"
#include "qrt/transpiler/capabilities.hpp"

namespace qrt {

struct Violation {
  enum class Kind { TooManyQubits, NonBasisGate, UncoupledPair };

  Kind kind;
  std::string detail;
  /// True when the transpiler can repair it (basis rewrite, routing).
  bool transpilable = false;

  bool operator==(const Violation&) const = default;
};

/// Report-style check of a logical circuit against a device. Two-qubit
/// coupling is checked under the trivial layout.
[[nodiscard]] std::vector<Violation> validate(const Circuit& circuit, const BackendCapabilities& caps);

[[nodiscard]] bool has_too_many_qubits(const std::vector<Violation>& violations);

}  // namespace qrt
