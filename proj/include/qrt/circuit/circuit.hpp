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

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qrt/core/error.hpp"

namespace qrt {

enum class Gate {
  H, X, Y, Z, S, Sdg, T, Tdg, Sx, Sxdg,
  Rx, Ry, Rz,
  Cx, Cz, Swap,
  Measure, Barrier,
};

[[nodiscard]] std::string_view gate_name(Gate g);
[[nodiscard]] std::optional<Gate> gate_from_name(std::string_view name);
[[nodiscard]] bool is_rotation(Gate g);
[[nodiscard]] bool is_two_qubit(Gate g);
/// Adjoint gate; rotations invert by negating the angle, so they map to
/// themselves here.
[[nodiscard]] Gate inverse_gate(Gate g);
/// Unitary gates only; measure and barrier are not "gates" for costing.
[[nodiscard]] bool is_unitary(Gate g);

/// A rotation angle: `offset` radians, plus an optional symbol.
/// Covers literal, symbol, and symbol +/- literal forms.
struct ParamExpr {
  std::optional<std::string> symbol;
  double offset = 0.0;

  static ParamExpr literal(double v) { return {std::nullopt, v}; }
  static ParamExpr sym(std::string name, double offset = 0.0) { return {std::move(name), offset}; }

  [[nodiscard]] bool is_literal() const { return !symbol.has_value(); }
  bool operator==(const ParamExpr&) const = default;
};

struct Instruction {
  Gate gate = Gate::Barrier;
  std::vector<int> qubits;
  std::vector<ParamExpr> params;
  std::vector<int> clbits;

  bool operator==(const Instruction&) const = default;
};

/// Map from symbol name to value in radians.
using ParamBinding = std::map<std::string, double>;

/// Parsed circuit. Invariants (index ranges, arity, declared symbols) are
/// enforced by `push` and by the parser; a Circuit value is always valid.
class Circuit {
 public:
  Circuit() = default;
  Circuit(int num_qubits, int num_clbits);

  [[nodiscard]] int num_qubits() const { return num_qubits_; }
  [[nodiscard]] int num_clbits() const { return num_clbits_; }
  [[nodiscard]] const std::vector<Instruction>& instructions() const { return instructions_; }
  [[nodiscard]] const std::set<std::string>& symbols() const { return symbols_; }
  [[nodiscard]] std::size_t size() const { return instructions_.size(); }

  void declare_symbol(const std::string& name);
  /// Appends after validating; throws Error(SEMANTIC_ERROR) on a violation.
  void push(Instruction inst);

  // Builder helpers.
  Circuit& add(Gate g, std::vector<int> qubits, std::vector<ParamExpr> params = {});
  Circuit& measure(int qubit, int clbit);

  /// Measured (qubit, clbit) pairs in program order.
  [[nodiscard]] std::vector<std::pair<int, int>> measurements() const;

  bool operator==(const Circuit&) const = default;

 private:
  int num_qubits_ = 0;
  int num_clbits_ = 0;
  std::vector<Instruction> instructions_;
  std::set<std::string> symbols_;
};

/// Returns a description of why `inst` is invalid in a circuit with the
/// given register sizes and symbols, or nullopt when it is valid.
[[nodiscard]] std::optional<std::string> check_instruction(const Instruction& inst, int num_qubits,
                                                           int num_clbits,
                                                           const std::set<std::string>& symbols);

/// Adjoint of a literal unitary instruction.
[[nodiscard]] Instruction inverse(const Instruction& inst);

/// Substitutes every symbol. Throws Error(UNBOUND_SYMBOL) if one is missing.
[[nodiscard]] Circuit bind_parameters(const Circuit& circuit, const ParamBinding& binding);

/// Evaluates a fully literal parameter (throws UNBOUND_SYMBOL otherwise).
[[nodiscard]] double literal_value(const ParamExpr& p);

}  // namespace qrt
