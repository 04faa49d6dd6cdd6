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

#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "qrt/circuit/circuit.hpp"

namespace qrt {

inline constexpr int kMaxSimulatedQubits = 12;

template <typename Scalar>
using StateVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<std::complex<Scalar>, 4, 4>;

using Statevector = StateVector<double>;

/// 2x2 unitary of a single-qubit gate (theta ignored for fixed gates).
template <typename Scalar>
Matrix2<Scalar> single_qubit_matrix(Gate g, Scalar theta = Scalar(0)) {
  using C = std::complex<Scalar>;
  const C i(0, 1);
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Matrix2<Scalar> m;
  switch (g) {
    case Gate::H: m << r, r, r, -r; break;
    case Gate::X: m << 0, 1, 1, 0; break;
    case Gate::Y: m << 0, -i, i, 0; break;
    case Gate::Z: m << 1, 0, 0, -1; break;
    case Gate::S: m << 1, 0, 0, i; break;
    case Gate::Sdg: m << 1, 0, 0, -i; break;
    case Gate::T: m << 1, 0, 0, std::polar(Scalar(1), pi / 4); break;
    case Gate::Tdg: m << 1, 0, 0, std::polar(Scalar(1), -pi / 4); break;
    case Gate::Sx: m << C(0.5, 0.5), C(0.5, -0.5), C(0.5, -0.5), C(0.5, 0.5); break;
    case Gate::Sxdg: m << C(0.5, -0.5), C(0.5, 0.5), C(0.5, 0.5), C(0.5, -0.5); break;
    case Gate::Rx: {
      const Scalar c = std::cos(theta / 2), s = std::sin(theta / 2);
      m << c, -i * s, -i * s, c;
      break;
    }
    case Gate::Ry: {
      const Scalar c = std::cos(theta / 2), s = std::sin(theta / 2);
      m << c, -s, s, c;
      break;
    }
    case Gate::Rz:
      m << std::polar(Scalar(1), -theta / 2), 0, 0, std::polar(Scalar(1), theta / 2);
      break;
    default: m.setIdentity(); break;
  }
  return m;
}

/// 4x4 unitary of a two-qubit gate in the basis index = b0 + 2*b1, where b0
/// is the first operand (the control for cx).
template <typename Scalar>
Matrix4<Scalar> two_qubit_matrix(Gate g) {
  Matrix4<Scalar> m = Matrix4<Scalar>::Zero();
  switch (g) {
    case Gate::Cx: m(0, 0) = m(2, 2) = m(3, 1) = m(1, 3) = 1; break;
    case Gate::Cz: m.diagonal() << 1, 1, 1, -1; break;
    case Gate::Swap: m(0, 0) = m(3, 3) = m(1, 2) = m(2, 1) = 1; break;
    default: m.setIdentity(); break;
  }
  return m;
}

template <typename Derived, typename Scalar>
void apply_single(Eigen::MatrixBase<Derived>& psi, const Matrix2<Scalar>& u, int q) {
  const Eigen::Index stride = Eigen::Index(1) << q;
  for (Eigen::Index base = 0; base < psi.size(); ++base) {
    if (base & stride) continue;
    const auto a0 = psi(base);
    const auto a1 = psi(base | stride);
    psi(base) = u(0, 0) * a0 + u(0, 1) * a1;
    psi(base | stride) = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

template <typename Derived, typename Scalar>
void apply_pair(Eigen::MatrixBase<Derived>& psi, const Matrix4<Scalar>& u, int q0, int q1) {
  const Eigen::Index m0 = Eigen::Index(1) << q0, m1 = Eigen::Index(1) << q1;
  Eigen::Matrix<std::complex<Scalar>, 4, 1> in, out;
  for (Eigen::Index base = 0; base < psi.size(); ++base) {
    if ((base & m0) || (base & m1)) continue;
    const Eigen::Index idx[4] = {base, base | m0, base | m1, base | m0 | m1};
    for (int k = 0; k < 4; ++k) in(k) = psi(idx[k]);
    out.noalias() = u * in;
    for (int k = 0; k < 4; ++k) psi(idx[k]) = out(k);
  }
}

/// Applies one literal-parameter unitary instruction; ignores measure/barrier.
template <typename Derived>
void apply_instruction(Eigen::MatrixBase<Derived>& psi, const Instruction& inst) {
  using Scalar = typename Derived::Scalar::value_type;
  if (!is_unitary(inst.gate)) return;
  if (is_two_qubit(inst.gate)) {
    apply_pair(psi, two_qubit_matrix<Scalar>(inst.gate), inst.qubits[0], inst.qubits[1]);
  } else {
    const Scalar theta = inst.params.empty() ? Scalar(0) : Scalar(literal_value(inst.params[0]));
    apply_single(psi, single_qubit_matrix<Scalar>(inst.gate, theta), inst.qubits[0]);
  }
}

/// Exact pre-measurement state of a fully bound circuit; qubit i is bit i of
/// the amplitude index. Measure and barrier are skipped. Throws TOO_LARGE
/// above kMaxSimulatedQubits and UNBOUND_SYMBOL for parametric circuits.
Statevector simulate_statevector(const Circuit& circuit);

/// Maximum |a_i - e^{i phi} b_i| after aligning global phase on the largest
/// amplitude of `a`. Vectors must have equal size.
double distance_up_to_phase(const Statevector& a, const Statevector& b);

}  // namespace qrt
