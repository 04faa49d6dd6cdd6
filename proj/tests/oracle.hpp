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

// Test-only reference implementations. Nothing here calls into the library's
// simulator or transpiler; expected values are derived independently.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrt/calibration/snapshot.hpp"
#include "qrt/circuit/circuit.hpp"
#include "qrt/transpiler/capabilities.hpp"

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat gate2(qrt::Gate g, double t) {
  const cd i(0, 1);
  const double r = 1 / std::sqrt(2.0), pi = std::numbers::pi;
  Mat m(2, 2);
  switch (g) {
    case qrt::Gate::H: m << r, r, r, -r; break;
    case qrt::Gate::X: m << 0, 1, 1, 0; break;
    case qrt::Gate::Y: m << 0, -i, i, 0; break;
    case qrt::Gate::Z: m << 1, 0, 0, -1; break;
    case qrt::Gate::S: m << 1, 0, 0, i; break;
    case qrt::Gate::Sdg: m << 1, 0, 0, -i; break;
    case qrt::Gate::T: m << 1, 0, 0, std::exp(i * pi / 4.0); break;
    case qrt::Gate::Tdg: m << 1, 0, 0, std::exp(-i * pi / 4.0); break;
    case qrt::Gate::Sx: m << cd(.5, .5), cd(.5, -.5), cd(.5, -.5), cd(.5, .5); break;
    case qrt::Gate::Sxdg: m << cd(.5, -.5), cd(.5, .5), cd(.5, .5), cd(.5, -.5); break;
    // Rotations as exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P.
    case qrt::Gate::Rx: m = std::cos(t / 2) * Mat::Identity(2, 2) - i * std::sin(t / 2) * gate2(qrt::Gate::X, 0); break;
    case qrt::Gate::Ry: m = std::cos(t / 2) * Mat::Identity(2, 2) - i * std::sin(t / 2) * gate2(qrt::Gate::Y, 0); break;
    case qrt::Gate::Rz: m = std::cos(t / 2) * Mat::Identity(2, 2) - i * std::sin(t / 2) * gate2(qrt::Gate::Z, 0); break;
    default: m.setIdentity(); break;
  }
  return m;
}

/// Full 2^n unitary by explicit basis-state action (qubit k = bit k).
inline Mat embed(const qrt::Instruction& inst, int n) {
  const int dim = 1 << n;
  Mat u = Mat::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    if (inst.qubits.size() == 1) {
      const int q = inst.qubits[0];
      const double t = inst.params.empty() ? 0.0 : inst.params[0].offset;
      const Mat g = gate2(inst.gate, t);
      const int b = (col >> q) & 1;
      for (int out = 0; out < 2; ++out) u((col & ~(1 << q)) | (out << q), col) += g(out, b);
    } else {
      const int a = inst.qubits[0], b = inst.qubits[1];
      const int ba = (col >> a) & 1, bb = (col >> b) & 1;
      int row = col;
      cd amp = 1;
      switch (inst.gate) {
        case qrt::Gate::Cx: if (ba) row ^= (1 << b); break;
        case qrt::Gate::Cz: if (ba && bb) amp = -1; break;
        case qrt::Gate::Swap: row = (col & ~((1 << a) | (1 << b))) | (ba << b) | (bb << a); break;
        default: break;
      }
      u(row, col) += amp;
    }
  }
  return u;
}

inline Mat unitary(const qrt::Circuit& c) {
  const int dim = 1 << c.num_qubits();
  Mat u = Mat::Identity(dim, dim);
  for (const auto& inst : c.instructions()) {
    if (!qrt::is_unitary(inst.gate)) continue;
    u = embed(inst, c.num_qubits()) * u;
  }
  return u;
}

inline Vec state(const qrt::Circuit& c) { return unitary(c).col(0); }

/// max |a - e^{iφ} b| minimized over the phase that aligns the largest entry.
inline double phase_distance(const Mat& a, const Mat& b) {
  Eigen::Index r = 0, col = 0;
  a.cwiseAbs().maxCoeff(&r, &col);
  cd ph = a(r, col) / b(r, col);
  ph /= std::abs(ph);
  return (a - ph * b).cwiseAbs().maxCoeff();
}

/// Random valid circuit over a fixed gate menu; literal angles only unless
/// with_symbols, in which case rotation params may reference theta/phi.
inline qrt::Circuit random_circuit(std::mt19937_64& rng, int max_qubits, int max_gates,
                                   bool with_measure = false, bool with_symbols = false) {
  using qrt::Gate;
  static const Gate menu[] = {Gate::H, Gate::X, Gate::Y, Gate::Z, Gate::S, Gate::Sdg, Gate::T,
                              Gate::Tdg, Gate::Sx, Gate::Rx, Gate::Ry, Gate::Rz, Gate::Cx,
                              Gate::Cz, Gate::Swap};
  std::uniform_int_distribution<int> nq_dist(1, max_qubits);
  const int nq = nq_dist(rng);
  qrt::Circuit c(nq, with_measure ? nq : 0);
  if (with_symbols) {
    c.declare_symbol("theta");
    c.declare_symbol("phi");
  }
  std::uniform_int_distribution<int> ng_dist(0, max_gates);
  std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
  const int ng = ng_dist(rng);
  for (int k = 0; k < ng; ++k) {
    Gate g = menu[rng() % std::size(menu)];
    if (qrt::is_two_qubit(g) && nq < 2) g = Gate::H;
    std::vector<int> qs{static_cast<int>(rng() % nq)};
    if (qrt::is_two_qubit(g)) {
      int b;
      do b = static_cast<int>(rng() % nq); while (b == qs[0]);
      qs.push_back(b);
    }
    std::vector<qrt::ParamExpr> ps;
    if (qrt::is_rotation(g)) {
      if (with_symbols && rng() % 2) {
        ps.push_back(qrt::ParamExpr::sym(rng() % 2 ? "theta" : "phi", (rng() % 3 == 0) ? 0.0 : angle(rng)));
      } else {
        ps.push_back(qrt::ParamExpr::literal(angle(rng)));
      }
    }
    c.push(qrt::Instruction{g, qs, ps, {}});
  }
  if (with_measure) {
    for (int q = 0; q < nq; ++q) c.measure(q, q);
  }
  return c;
}

/// Brute-force layout score, written from the definition: gate errors of
/// placed gates (uncoupled 2q pairs cost 1) plus readout errors of measured qubits.
inline double score(const qrt::Circuit& c, const qrt::BackendCapabilities& caps,
                    const qrt::CalibrationSnapshot& cal, const std::vector<int>& layout) {
  double s = 0;
  for (const auto& inst : c.instructions()) {
    if (inst.gate == qrt::Gate::Barrier) continue;
    if (inst.gate == qrt::Gate::Measure) {
      s += cal.qubits[layout[inst.qubits[0]]].readout_error;
      continue;
    }
    std::vector<int> p;
    for (int q : inst.qubits) p.push_back(layout[q]);
    if (p.size() == 2) {
      const auto a = std::min(p[0], p[1]), b = std::max(p[0], p[1]);
      if (!caps.coupling.count({a, b})) {
        s += 1.0;
        continue;
      }
    }
    auto it = cal.gates.find(qrt::GateKey::make(std::string(qrt::gate_name(inst.gate)), p));
    s += it == cal.gates.end() ? 0.0 : it->second.error_rate;
  }
  return s;
}

/// Minimum score over all injective layouts, with the lexicographically
/// smallest minimizer.
inline std::pair<double, std::vector<int>> brute_force_layout(const qrt::Circuit& c,
                                                              const qrt::BackendCapabilities& caps,
                                                              const qrt::CalibrationSnapshot& cal) {
  std::vector<int> phys(caps.num_qubits);
  for (int i = 0; i < caps.num_qubits; ++i) phys[i] = i;
  double best = 1e300;
  std::vector<int> best_layout;
  // Enumerate permutations of the device and take the prefix; prefixes come
  // out in lexicographic order, so the first minimizer is the smallest.
  do {
    std::vector<int> layout(phys.begin(), phys.begin() + c.num_qubits());
    const double s = score(c, caps, cal, layout);
    if (s < best) {
      best = s;
      best_layout = layout;
    }
  } while (std::next_permutation(phys.begin(), phys.end()));
  return {best, best_layout};
}

/// Random snapshot over `caps`: errors for every calibrated gate on every
/// qubit and coupled pair, plus readout errors. Values are drawn from a small
/// grid so exact ties between layouts actually happen.
inline qrt::CalibrationSnapshot random_calibration(std::mt19937_64& rng, const qrt::BackendCapabilities& caps) {
  qrt::CalibrationSnapshot cal;
  cal.backend_id = caps.backend_id;
  auto draw = [&] { return static_cast<double>(rng() % 8) * 0.005; };
  for (int q = 0; q < caps.num_qubits; ++q) {
    cal.qubits.push_back({100.0, 120.0, 5.0, draw()});
    for (const char* g : {"rz", "sx", "x"}) cal.gates[qrt::GateKey::make(g, {q})] = {draw(), 35.0};
  }
  for (const auto& [a, b] : caps.coupling) cal.gates[qrt::GateKey::make("cx", {a, b})] = {draw(), 300.0};
  return cal;
}

/// Embeds an n-qubit state into `physical` qubits: logical l sits on bit
/// perm[l], every other physical qubit is |0>.
inline Vec embed_state(const Vec& logical, const std::vector<int>& perm, int physical) {
  Vec out = Vec::Zero(Eigen::Index(1) << physical);
  for (Eigen::Index i = 0; i < logical.size(); ++i) {
    Eigen::Index j = 0;
    for (std::size_t l = 0; l < perm.size(); ++l) {
      if ((i >> l) & 1) j |= Eigen::Index(1) << perm[l];
    }
    out(j) = logical(i);
  }
  return out;
}

}  // namespace oracle
