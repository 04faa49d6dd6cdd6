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
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "qrt/calibration/snapshot.hpp"
#include "qrt/circuit/circuit.hpp"
#include "qrt/core/time.hpp"
#include "qrt/transpiler/capabilities.hpp"

namespace qrt {

/// layout[logical] = physical qubit.
using Layout = std::vector<int>;

/// Rewrites every gate outside `basis` using fixed rules; the result equals
/// the input up to global phase. Throws UNSUPPORTED_GATE when no rule applies.
[[nodiscard]] Circuit decompose(const Circuit& circuit, const std::set<std::string>& basis);

struct RoutedCircuit {
  /// Over the device's physical qubits; every 2q gate is on a coupled pair.
  Circuit circuit;
  /// output_permutation[logical] = physical qubit holding it at the end.
  std::vector<int> output_permutation;
};

/// Inserts swaps (as cx triples) along shortest coupling paths so every 2q
/// gate is adjacent. Measurements keep their logical clbits. Throws
/// DISCONNECTED_QUBITS when no path exists.
[[nodiscard]] RoutedCircuit route(const Circuit& circuit, const BackendCapabilities& caps,
                                  const Layout& layout);

/// Penalty charged for a two-qubit gate placed on an uncoupled pair.
inline constexpr double kUncoupledPenalty = 1.0;

/// Sum of gate errors of the placed circuit plus readout errors of measured
/// qubits. Logical qubits mapped to -1 are treated as unplaced and their
/// instructions are skipped.
[[nodiscard]] double layout_score(const Circuit& circuit, const BackendCapabilities& caps,
                                  const CalibrationSnapshot& cal, const Layout& layout);

/// Error-aware initial placement. Exhaustive (lexicographic tie-break) up to
/// kExhaustiveLayoutLimit physical qubits, greedy above.
inline constexpr int kExhaustiveLayoutLimit = 6;
[[nodiscard]] Layout select_layout(const Circuit& circuit, const BackendCapabilities& caps,
                                   const CalibrationSnapshot& cal);

struct CompiledTemplate {
  std::string template_id;
  BackendCapabilities caps;
  /// Decomposed logical circuit, kept for recompilation.
  Circuit logical;
  Circuit routed;
  Layout layout;
  std::vector<int> output_permutation;
  Timestamp layout_calibration_ts{};
  int compile_count = 0;
};

/// decompose -> select_layout -> route. Throws TOO_MANY_QUBITS when the
/// circuit does not fit, plus anything its stages throw.
[[nodiscard]] CompiledTemplate compile_template(const Circuit& circuit, const BackendCapabilities& caps,
                                                const CalibrationSnapshot& cal);

/// Re-runs layout and routing against `cal`; compile_count increments.
[[nodiscard]] CompiledTemplate recompile(const CompiledTemplate& tpl, const CalibrationSnapshot& cal);

struct ExecutablePayload {
  Circuit circuit;
  std::string backend_id;
  std::int64_t shots = 0;
  Timestamp calibration_ts{};
  std::int64_t estimated_duration_ns = 0;
  double estimated_fidelity = 1.0;
  std::string template_id;
  std::uint64_t seed = 0;
};

/// Bind-time hook: returns the angle to use for an rz on `physical_qubit`.
using AngleAdjuster =
    std::function<double(int physical_qubit, double angle, const CalibrationSnapshot& cal)>;

inline constexpr Duration kDefaultStalenessLimit = std::chrono::seconds(300);

struct BindOptions {
  std::int64_t shots = 1024;
  Timestamp now{};
  Duration staleness_limit = kDefaultStalenessLimit;
  std::uint64_t seed = 0;
  AngleAdjuster adjust_angle;  // empty: no frame offset
};

/// Late binding against the freshest calibration. Throws UNBOUND_SYMBOL,
/// STALE_CALIBRATION (snapshot older than the limit), RECOMPILE_REQUIRED
/// (snapshot drifted from the one used for layout by more than the limit),
/// INVALID_SHOTS.
[[nodiscard]] ExecutablePayload bind_with_calibration(const CompiledTemplate& tpl,
                                                      const ParamBinding& binding,
                                                      const CalibrationSnapshot& cal,
                                                      const BindOptions& options);

/// Σ gate durations + readout, rounded up to the timing granularity.
[[nodiscard]] std::int64_t estimate_duration_ns(const Circuit& circuit, const BackendCapabilities& caps);

/// First-order fidelity: Π(1-ε) over gates × Π(1-readout) over measured qubits.
[[nodiscard]] double estimate_fidelity(const Circuit& circuit, const CalibrationSnapshot& cal);

struct ObservedExecution {
  double duration_ns = 0.0;
  double success_rate = 1.0;
};

struct FidelityRecord {
  std::string template_id;
  std::string backend_id;
  double estimated_fidelity = 1.0;
  double observed_success_rate = 1.0;
};

/// Post-execution feedback. Keeps a per-backend duration correction factor
/// (EWMA of observed/estimated, weight kAlpha) and a fidelity log.
/// Thread-safe.
class DurationModel {
 public:
  static constexpr double kAlpha = 0.2;

  /// Updates the factor for `backend` from one observation.
  void record(const std::string& backend, double estimated_ns, double observed_ns);
  void record_feedback(const CompiledTemplate& tpl, const ExecutablePayload& payload,
                       const ObservedExecution& observed);

  [[nodiscard]] double factor(const std::string& backend) const;
  [[nodiscard]] double adjust(const std::string& backend, double raw_ns) const {
    return raw_ns * factor(backend);
  }
  [[nodiscard]] std::vector<FidelityRecord> fidelity_log() const;

  [[nodiscard]] std::map<std::string, double> factors() const;
  void restore(std::map<std::string, double> factors);

 private:
  mutable std::mutex mu_;
  std::map<std::string, double> factor_;
  std::vector<FidelityRecord> log_;
};

}  // namespace qrt
