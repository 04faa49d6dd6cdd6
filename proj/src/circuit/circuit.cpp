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

#include "qrt/circuit/circuit.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace qrt {

namespace {

struct GateInfo {
  Gate gate;
  std::string_view name;
};

constexpr std::array<GateInfo, 18> kGates{{
    {Gate::H, "h"},      {Gate::X, "x"},       {Gate::Y, "y"},     {Gate::Z, "z"},
    {Gate::S, "s"},      {Gate::Sdg, "sdg"},   {Gate::T, "t"},     {Gate::Tdg, "tdg"},
    {Gate::Sx, "sx"},    {Gate::Sxdg, "sxdg"}, {Gate::Rx, "rx"},   {Gate::Ry, "ry"},
    {Gate::Rz, "rz"},    {Gate::Cx, "cx"},     {Gate::Cz, "cz"},   {Gate::Swap, "swap"},
    {Gate::Measure, "measure"}, {Gate::Barrier, "barrier"},
}};

}  // namespace

std::string_view gate_name(Gate g) {
  for (const auto& info : kGates) {
    if (info.gate == g) return info.name;
  }
  return "?";
}

std::optional<Gate> gate_from_name(std::string_view name) {
  for (const auto& info : kGates) {
    if (info.name == name) return info.gate;
  }
  return std::nullopt;
}

bool is_rotation(Gate g) { return g == Gate::Rx || g == Gate::Ry || g == Gate::Rz; }

bool is_two_qubit(Gate g) { return g == Gate::Cx || g == Gate::Cz || g == Gate::Swap; }

bool is_unitary(Gate g) { return g != Gate::Measure && g != Gate::Barrier; }

Gate inverse_gate(Gate g) {
  switch (g) {
    case Gate::S: return Gate::Sdg;
    case Gate::Sdg: return Gate::S;
    case Gate::T: return Gate::Tdg;
    case Gate::Tdg: return Gate::T;
    case Gate::Sx: return Gate::Sxdg;
    case Gate::Sxdg: return Gate::Sx;
    default: return g;
  }
}

Instruction inverse(const Instruction& inst) {
  Instruction out = inst;
  out.gate = inverse_gate(inst.gate);
  for (auto& p : out.params) p = ParamExpr::literal(-literal_value(p));
  return out;
}

std::optional<std::string> check_instruction(const Instruction& inst, int num_qubits,
                                             int num_clbits,
                                             const std::set<std::string>& symbols) {
  const auto name = std::string(gate_name(inst.gate));
  for (int q : inst.qubits) {
    if (q < 0 || q >= num_qubits) {
      return "qubit index " + std::to_string(q) + " out of range for qreg of size " +
             std::to_string(num_qubits);
    }
  }
  for (int c : inst.clbits) {
    if (c < 0 || c >= num_clbits) {
      return "clbit index " + std::to_string(c) + " out of range for creg of size " +
             std::to_string(num_clbits);
    }
  }
  std::size_t expected_qubits = 1;
  if (is_two_qubit(inst.gate)) expected_qubits = 2;
  if (inst.gate == Gate::Barrier) {
    if (inst.qubits.empty()) return "barrier needs at least one qubit";
  } else if (inst.qubits.size() != expected_qubits) {
    return name + " expects " + std::to_string(expected_qubits) + " qubit(s), got " +
           std::to_string(inst.qubits.size());
  }
  auto sorted = inst.qubits;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return name + " operands must be distinct qubits";
  }
  const std::size_t expected_params = is_rotation(inst.gate) ? 1 : 0;
  if (inst.params.size() != expected_params) {
    return name + " expects " + std::to_string(expected_params) + " parameter(s), got " +
           std::to_string(inst.params.size());
  }
  if (inst.gate == Gate::Measure) {
    if (inst.clbits.size() != 1) return "measure maps exactly one qubit to one clbit";
  } else if (!inst.clbits.empty()) {
    return name + " takes no classical bits";
  }
  for (const auto& p : inst.params) {
    if (p.symbol && !symbols.contains(*p.symbol)) {
      return "undeclared symbol '" + *p.symbol + "'";
    }
  }
  return std::nullopt;
}

Circuit::Circuit(int num_qubits, int num_clbits) : num_qubits_(num_qubits), num_clbits_(num_clbits) {
  if (num_qubits < 0 || num_clbits < 0) {
    throw Error(codes::kSemanticError, "register sizes must be non-negative");
  }
}

void Circuit::declare_symbol(const std::string& name) { symbols_.insert(name); }

void Circuit::push(Instruction inst) {
  if (auto why = check_instruction(inst, num_qubits_, num_clbits_, symbols_)) {
    throw Error(codes::kSemanticError, *why);
  }
  instructions_.push_back(std::move(inst));
}

Circuit& Circuit::add(Gate g, std::vector<int> qubits, std::vector<ParamExpr> params) {
  for (const auto& p : params) {
    if (p.symbol) declare_symbol(*p.symbol);
  }
  push(Instruction{g, std::move(qubits), std::move(params), {}});
  return *this;
}

Circuit& Circuit::measure(int qubit, int clbit) {
  push(Instruction{Gate::Measure, {qubit}, {}, {clbit}});
  return *this;
}

std::vector<std::pair<int, int>> Circuit::measurements() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& inst : instructions_) {
    if (inst.gate == Gate::Measure) out.emplace_back(inst.qubits[0], inst.clbits[0]);
  }
  return out;
}

double literal_value(const ParamExpr& p) {
  if (p.symbol) throw Error(codes::kUnboundSymbol, "unbound symbol '" + *p.symbol + "'",
                            {{"symbol", *p.symbol}});
  return p.offset;
}

Circuit bind_parameters(const Circuit& circuit, const ParamBinding& binding) {
  for (const auto& s : circuit.symbols()) {
    if (!binding.contains(s)) {
      throw Error(codes::kUnboundSymbol, "unbound symbol '" + s + "'", {{"symbol", s}});
    }
  }
  Circuit out(circuit.num_qubits(), circuit.num_clbits());
  for (auto inst : circuit.instructions()) {
    for (auto& p : inst.params) {
      if (p.symbol) p = ParamExpr::literal(binding.at(*p.symbol) + p.offset);
    }
    out.push(std::move(inst));
  }
  return out;
}

}  // namespace qrt
