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

#include "qrt/backend/sampler.hpp"

#include <algorithm>
#include <array>

#include "qrt/backend/statevector.hpp"
#include "qrt/core/random.hpp"

namespace qrt {

nlohmann::json to_json(const Counts& counts) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [k, v] : counts.histogram) hist[k] = v;
  return {{"counts", std::move(hist)}, {"shots", counts.shots}};
}

Counts counts_from_json(const nlohmann::json& j) {
  Counts c;
  for (const auto& [k, v] : j.at("counts").items()) c.histogram[k] = v.get<std::int64_t>();
  c.shots = j.at("shots").get<std::int64_t>();
  return c;
}

NoiseModel NoiseModel::from_calibration(const CalibrationSnapshot& cal) {
  NoiseModel n;
  for (const auto& [key, g] : cal.gates) n.gate_error[key] = g.error_rate;
  for (const auto& q : cal.qubits) n.readout_error.push_back(q.readout_error);
  return n;
}

double NoiseModel::gate_probability(const Instruction& inst) const {
  if (!is_unitary(inst.gate)) return 0.0;
  auto it = gate_error.find(GateKey::make(std::string(gate_name(inst.gate)), inst.qubits));
  if (it != gate_error.end()) return it->second;
  // An adjoint (sxdg after folding, say) is as noisy as the calibrated gate.
  it = gate_error.find(GateKey::make(std::string(gate_name(inverse_gate(inst.gate))), inst.qubits));
  if (it != gate_error.end()) return it->second;
  return inst.qubits.size() == 2 ? default_2q : default_1q;
}

double NoiseModel::readout(int qubit) const {
  if (qubit < 0 || static_cast<std::size_t>(qubit) >= readout_error.size()) return 0.0;
  return readout_error[qubit];
}

bool NoiseModel::gates_noiseless() const {
  return default_1q == 0.0 && default_2q == 0.0 &&
         std::all_of(gate_error.begin(), gate_error.end(), [](const auto& kv) { return kv.second == 0.0; });
}

namespace {

// Measurements are terminal when no later unitary touches a measured qubit
// and no qubit is measured twice; then sampling the final state is exact.
bool measurements_terminal(const Circuit& c) {
  std::vector<bool> measured(static_cast<std::size_t>(c.num_qubits()), false);
  for (const auto& inst : c.instructions()) {
    if (inst.gate == Gate::Measure) {
      if (measured[inst.qubits[0]]) return false;
      measured[inst.qubits[0]] = true;
    } else if (is_unitary(inst.gate)) {
      for (int q : inst.qubits) {
        if (measured[q]) return false;
      }
    }
  }
  return true;
}

std::string render(const std::vector<char>& bits) {
  // bits[i] is clbit i; clbit 0 is the rightmost character.
  return std::string(bits.rbegin(), bits.rend());
}

constexpr std::array<Gate, 3> kPaulis{Gate::X, Gate::Y, Gate::Z};

void apply_pauli(Statevector& psi, int which, int q) {
  apply_single(psi, single_qubit_matrix<double>(kPaulis[which]), q);
}

void apply_random_pauli(Statevector& psi, const Instruction& inst, Rng& rng) {
  if (inst.qubits.size() == 1) {
    apply_pauli(psi, static_cast<int>(uniform_below(rng, 3)), inst.qubits[0]);
    return;
  }
  // 15 non-identity two-qubit Paulis: index in [1, 16), digit 0 = I.
  const auto code = 1 + uniform_below(rng, 15);
  const int p0 = static_cast<int>(code % 4), p1 = static_cast<int>(code / 4);
  if (p0) apply_pauli(psi, p0 - 1, inst.qubits[0]);
  if (p1) apply_pauli(psi, p1 - 1, inst.qubits[1]);
}

char read_bit(int outcome, int qubit, const NoiseModel& noise, Rng& rng) {
  const double flip = noise.readout(qubit);
  if (flip > 0.0 && uniform01(rng) < flip) outcome ^= 1;
  return outcome ? '1' : '0';
}

}  // namespace

Counts simulate_counts(const Circuit& circuit, const NoiseModel& noise, std::int64_t shots,
                       std::uint64_t seed) {
  if (shots < 1) throw Error(codes::kInvalidShots, "shots must be >= 1");
  if (circuit.num_qubits() > kMaxSimulatedQubits) {
    throw Error(codes::kTooLarge, "simulation is limited to " + std::to_string(kMaxSimulatedQubits) +
                                      " qubits");
  }
  if (!circuit.symbols().empty()) throw Error(codes::kUnboundSymbol, "circuit has unbound symbols");

  Rng rng(seed);
  Counts out;
  out.shots = shots;
  const auto nclbits = static_cast<std::size_t>(circuit.num_clbits());
  const auto& program = circuit.instructions();

  if (noise.gates_noiseless() && measurements_terminal(circuit)) {
    const Statevector psi = simulate_statevector(circuit);
    std::vector<double> cdf(static_cast<std::size_t>(psi.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      acc += std::norm(psi(i));
      cdf[i] = acc;
    }
    const auto measured = circuit.measurements();
    for (std::int64_t s = 0; s < shots; ++s) {
      const double u = uniform01(rng) * acc;
      const auto idx = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
      std::vector<char> bits(nclbits, '0');
      for (const auto& [q, c] : measured) bits[c] = read_bit(static_cast<int>((idx >> q) & 1U), q, noise, rng);
      ++out.histogram[render(bits)];
    }
    return out;
  }

  std::vector<double> p_gate(program.size());
  for (std::size_t i = 0; i < program.size(); ++i) p_gate[i] = noise.gate_probability(program[i]);

  const Eigen::Index dim = Eigen::Index(1) << circuit.num_qubits();
  Statevector psi(dim);
  for (std::int64_t s = 0; s < shots; ++s) {
    psi.setZero();
    psi(0) = 1.0;
    std::vector<char> bits(nclbits, '0');
    for (std::size_t i = 0; i < program.size(); ++i) {
      const auto& inst = program[i];
      if (inst.gate == Gate::Measure) {
        const int q = inst.qubits[0];
        const Eigen::Index mask = Eigen::Index(1) << q;
        double p1 = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) {
          if (k & mask) p1 += std::norm(psi(k));
        }
        const int outcome = uniform01(rng) < p1 ? 1 : 0;
        const double keep = outcome ? p1 : 1.0 - p1;
        const double scale = keep > 0.0 ? 1.0 / std::sqrt(keep) : 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) {
          psi(k) = (((k & mask) != 0) == (outcome == 1)) ? psi(k) * scale : 0.0;
        }
        bits[inst.clbits[0]] = read_bit(outcome, q, noise, rng);
        continue;
      }
      apply_instruction(psi, inst);
      if (p_gate[i] > 0.0 && uniform01(rng) < p_gate[i]) apply_random_pauli(psi, inst, rng);
    }
    ++out.histogram[render(bits)];
  }
  return out;
}

}  // namespace qrt
