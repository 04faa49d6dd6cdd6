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

#include "qrt/transpiler/transpiler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

#include "qrt/circuit/qasm.hpp"
#include "qrt/circuit/validate.hpp"
#include "qrt/core/random.hpp"

namespace qrt {

namespace {

constexpr double kPi = std::numbers::pi;

Instruction one(Gate g, int q, std::vector<ParamExpr> params = {}) {
  return Instruction{g, {q}, std::move(params), {}};
}
Instruction two(Gate g, int a, int b) { return Instruction{g, {a, b}, {}, {}}; }
ParamExpr lit(double v) { return ParamExpr::literal(v); }

// One rewrite step; empty result means "no rule".
std::vector<Instruction> rewrite(const Instruction& inst) {
  const int q = inst.qubits[0];
  switch (inst.gate) {
    case Gate::H: return {one(Gate::Rz, q, {lit(kPi / 2)}), one(Gate::Sx, q), one(Gate::Rz, q, {lit(kPi / 2)})};
    case Gate::X: return {one(Gate::Sx, q), one(Gate::Sx, q)};
    case Gate::Y: return {one(Gate::Rz, q, {lit(kPi)}), one(Gate::X, q)};
    case Gate::Z: return {one(Gate::Rz, q, {lit(kPi)})};
    case Gate::S: return {one(Gate::Rz, q, {lit(kPi / 2)})};
    case Gate::Sdg: return {one(Gate::Rz, q, {lit(-kPi / 2)})};
    case Gate::T: return {one(Gate::Rz, q, {lit(kPi / 4)})};
    case Gate::Tdg: return {one(Gate::Rz, q, {lit(-kPi / 4)})};
    case Gate::Sxdg: return {one(Gate::Sx, q), one(Gate::X, q)};
    case Gate::Rx: return {one(Gate::H, q), one(Gate::Rz, q, inst.params), one(Gate::H, q)};
    case Gate::Ry: return {one(Gate::Sdg, q), one(Gate::Rx, q, inst.params), one(Gate::S, q)};
    case Gate::Cz: {
      const int t = inst.qubits[1];
      return {one(Gate::H, t), two(Gate::Cx, q, t), one(Gate::H, t)};
    }
    case Gate::Swap: {
      const int b = inst.qubits[1];
      return {two(Gate::Cx, q, b), two(Gate::Cx, b, q), two(Gate::Cx, q, b)};
    }
    default: return {};
  }
}

void lower(const Instruction& inst, const std::set<std::string>& basis, Circuit& out, int depth) {
  if (!is_unitary(inst.gate) || basis.contains(std::string(gate_name(inst.gate)))) {
    out.push(inst);
    return;
  }
  auto steps = rewrite(inst);
  if (steps.empty() || depth > 8) {
    throw Error(codes::kUnsupportedGate,
                "no rule lowers '" + std::string(gate_name(inst.gate)) + "' to the basis",
                {{"gate", gate_name(inst.gate)}});
  }
  for (const auto& s : steps) lower(s, basis, out, depth + 1);
}

Circuit empty_like(const Circuit& c, int num_qubits) {
  Circuit out(num_qubits, c.num_clbits());
  for (const auto& s : c.symbols()) out.declare_symbol(s);
  return out;
}

std::vector<int> shortest_path(const std::vector<std::vector<int>>& adj, int from, int to) {
  std::vector<int> prev(adj.size(), -1);
  std::vector<bool> seen(adj.size(), false);
  std::deque<int> frontier{from};
  seen[from] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    if (u == to) break;
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        prev[v] = u;
        frontier.push_back(v);
      }
    }
  }
  if (!seen[to]) return {};
  std::vector<int> path{to};
  while (path.back() != from) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::string make_template_id(const Circuit& logical, const std::string& backend) {
  const std::string text = to_qasm(logical) + "@" + backend;
  std::ostringstream out;
  out << "tpl-" << std::hex << mix64(hash_string(text));
  return out.str();
}

}  // namespace

Circuit decompose(const Circuit& circuit, const std::set<std::string>& basis) {
  Circuit out = empty_like(circuit, circuit.num_qubits());
  for (const auto& inst : circuit.instructions()) lower(inst, basis, out, 0);
  return out;
}

RoutedCircuit route(const Circuit& circuit, const BackendCapabilities& caps, const Layout& layout) {
  if (layout.size() != static_cast<std::size_t>(circuit.num_qubits())) {
    throw Error(codes::kInvalidArgument, "layout size does not match circuit");
  }
  std::vector<int> phys_of = layout;
  std::vector<int> logical_at(static_cast<std::size_t>(caps.num_qubits), -1);
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const int p = layout[l];
    if (p < 0 || p >= caps.num_qubits || logical_at[p] != -1) {
      throw Error(codes::kInvalidArgument, "layout is not injective into the device");
    }
    logical_at[p] = static_cast<int>(l);
  }
  const auto adj = caps.adjacency();
  Circuit out = empty_like(circuit, caps.num_qubits);

  auto swap_physical = [&](int a, int b) {
    out.push(two(Gate::Cx, a, b));
    out.push(two(Gate::Cx, b, a));
    out.push(two(Gate::Cx, a, b));
    std::swap(logical_at[a], logical_at[b]);
    if (logical_at[a] >= 0) phys_of[logical_at[a]] = a;
    if (logical_at[b] >= 0) phys_of[logical_at[b]] = b;
  };

  for (const auto& inst : circuit.instructions()) {
    Instruction mapped = inst;
    if (inst.qubits.size() == 2 && inst.gate != Gate::Barrier) {
      int pa = phys_of[inst.qubits[0]];
      const int pb = phys_of[inst.qubits[1]];
      if (!caps.coupled(pa, pb)) {
        const auto path = shortest_path(adj, pa, pb);
        if (path.empty()) {
          throw Error(codes::kDisconnectedQubits,
                      "no coupling path between physical qubits " + std::to_string(pa) + " and " +
                          std::to_string(pb));
        }
        for (std::size_t i = 0; i + 2 < path.size(); ++i) swap_physical(path[i], path[i + 1]);
        pa = phys_of[inst.qubits[0]];
      }
      mapped.qubits = {pa, pb};
    } else {
      for (auto& q : mapped.qubits) q = phys_of[q];
    }
    out.push(std::move(mapped));
  }
  return RoutedCircuit{std::move(out), std::move(phys_of)};
}

double layout_score(const Circuit& circuit, const BackendCapabilities& caps, const CalibrationSnapshot& cal,
                    const Layout& layout) {
  double score = 0.0;
  for (const auto& inst : circuit.instructions()) {
    if (inst.gate == Gate::Barrier) continue;
    std::vector<int> phys;
    phys.reserve(inst.qubits.size());
    bool placed = true;
    for (int q : inst.qubits) {
      if (layout[q] < 0) placed = false;
      phys.push_back(layout[q]);
    }
    if (!placed) continue;
    if (inst.gate == Gate::Measure) {
      score += cal.readout_error(phys[0]);
    } else if (phys.size() == 2 && !caps.coupled(phys[0], phys[1])) {
      score += kUncoupledPenalty;
    } else {
      score += cal.gate_error(std::string(gate_name(inst.gate)), phys);
    }
  }
  return score;
}

namespace {

void exhaustive(const Circuit& c, const BackendCapabilities& caps, const CalibrationSnapshot& cal,
                Layout& current, std::vector<bool>& used, std::size_t depth, Layout& best,
                double& best_score) {
  if (depth == current.size()) {
    const double s = layout_score(c, caps, cal, current);
    if (best.empty() || s < best_score) {
      best = current;
      best_score = s;
    }
    return;
  }
  for (int p = 0; p < caps.num_qubits; ++p) {
    if (used[p]) continue;
    used[p] = true;
    current[depth] = p;
    exhaustive(c, caps, cal, current, used, depth + 1, best, best_score);
    used[p] = false;
  }
  current[depth] = -1;
}

Layout greedy(const Circuit& c, const BackendCapabilities& caps, const CalibrationSnapshot& cal) {
  const int n = c.num_qubits();
  std::vector<std::vector<int>> weight(n, std::vector<int>(n, 0));
  bool any_pair = false;
  for (const auto& inst : c.instructions()) {
    if (inst.qubits.size() == 2 && inst.gate != Gate::Barrier) {
      ++weight[inst.qubits[0]][inst.qubits[1]];
      ++weight[inst.qubits[1]][inst.qubits[0]];
      any_pair = true;
    }
  }
  Layout layout(n, -1);
  std::vector<bool> used(caps.num_qubits, false);
  auto place = [&](int l, int p) {
    layout[l] = p;
    used[p] = true;
  };

  if (any_pair) {
    int ba = 0, bb = 1, bw = -1;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (weight[a][b] > bw) {
          bw = weight[a][b];
          ba = a;
          bb = b;
        }
      }
    }
    double best = std::numeric_limits<double>::infinity();
    int bp = -1, bq = -1;
    for (int p = 0; p < caps.num_qubits; ++p) {
      for (int q = 0; q < caps.num_qubits; ++q) {
        if (p == q || !caps.coupled(p, q)) continue;
        Layout trial(n, -1);
        trial[ba] = p;
        trial[bb] = q;
        const double s = layout_score(c, caps, cal, trial);
        if (s < best) {
          best = s;
          bp = p;
          bq = q;
        }
      }
    }
    if (bp >= 0) {
      place(ba, bp);
      place(bb, bq);
    }
  }

  const auto adj = caps.adjacency();
  for (int placed = 0; placed < n; ++placed) {
    // Next logical: strongest interaction with the placed set, lowest index on ties.
    int next = -1, next_w = -1;
    for (int l = 0; l < n; ++l) {
      if (layout[l] >= 0) continue;
      int w = 0;
      for (int m = 0; m < n; ++m) {
        if (layout[m] >= 0) w += weight[l][m];
      }
      if (w > next_w) {
        next_w = w;
        next = l;
      }
    }
    if (next < 0) break;
    std::vector<int> candidates;
    for (int m = 0; m < n; ++m) {
      if (layout[m] < 0 || weight[next][m] == 0) continue;
      for (int v : adj[layout[m]]) {
        if (!used[v]) candidates.push_back(v);
      }
    }
    if (candidates.empty()) {
      for (int p = 0; p < caps.num_qubits; ++p) {
        if (!used[p]) candidates.push_back(p);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best = std::numeric_limits<double>::infinity();
    int choice = candidates.front();
    for (int p : candidates) {
      Layout trial = layout;
      trial[next] = p;
      const double s = layout_score(c, caps, cal, trial);
      if (s < best) {
        best = s;
        choice = p;
      }
    }
    place(next, choice);
  }
  return layout;
}

}  // namespace

Layout select_layout(const Circuit& circuit, const BackendCapabilities& caps, const CalibrationSnapshot& cal) {
  if (circuit.num_qubits() > caps.num_qubits) {
    throw Error(codes::kTooManyQubits, "circuit needs more qubits than the device has");
  }
  if (caps.num_qubits <= kExhaustiveLayoutLimit) {
    Layout current(circuit.num_qubits(), -1), best;
    std::vector<bool> used(caps.num_qubits, false);
    double best_score = 0.0;
    exhaustive(circuit, caps, cal, current, used, 0, best, best_score);
    return best;
  }
  return greedy(circuit, caps, cal);
}

CompiledTemplate compile_template(const Circuit& circuit, const BackendCapabilities& caps,
                                  const CalibrationSnapshot& cal) {
  if (has_too_many_qubits(validate(circuit, caps))) {
    throw Error(codes::kTooManyQubits, "circuit uses " + std::to_string(circuit.num_qubits()) +
                                           " qubits; " + caps.backend_id + " has " +
                                           std::to_string(caps.num_qubits));
  }
  CompiledTemplate tpl;
  tpl.caps = caps;
  tpl.logical = decompose(circuit, caps.basis_gates);
  tpl.template_id = make_template_id(tpl.logical, caps.backend_id);
  tpl.layout = select_layout(tpl.logical, caps, cal);
  auto routed = route(tpl.logical, caps, tpl.layout);
  tpl.routed = std::move(routed.circuit);
  tpl.output_permutation = std::move(routed.output_permutation);
  tpl.layout_calibration_ts = cal.timestamp;
  tpl.compile_count = 1;
  return tpl;
}

CompiledTemplate recompile(const CompiledTemplate& tpl, const CalibrationSnapshot& cal) {
  CompiledTemplate next = tpl;
  next.layout = select_layout(tpl.logical, tpl.caps, cal);
  auto routed = route(tpl.logical, tpl.caps, next.layout);
  next.routed = std::move(routed.circuit);
  next.output_permutation = std::move(routed.output_permutation);
  next.layout_calibration_ts = cal.timestamp;
  next.compile_count = tpl.compile_count + 1;
  return next;
}

std::int64_t estimate_duration_ns(const Circuit& circuit, const BackendCapabilities& caps) {
  std::int64_t total = caps.readout_duration_ns;
  for (const auto& inst : circuit.instructions()) {
    if (!is_unitary(inst.gate)) continue;
    auto it = caps.gate_durations_ns.find(std::string(gate_name(inst.gate)));
    if (it != caps.gate_durations_ns.end()) total += it->second;
  }
  const std::int64_t g = std::max<std::int64_t>(1, caps.timing_granularity_ns);
  return (total + g - 1) / g * g;
}

double estimate_fidelity(const Circuit& circuit, const CalibrationSnapshot& cal) {
  double f = 1.0;
  for (const auto& inst : circuit.instructions()) {
    if (inst.gate == Gate::Measure) {
      f *= 1.0 - cal.readout_error(inst.qubits[0]);
    } else if (is_unitary(inst.gate)) {
      f *= 1.0 - cal.gate_error(std::string(gate_name(inst.gate)), inst.qubits);
    }
  }
  return f;
}

ExecutablePayload bind_with_calibration(const CompiledTemplate& tpl, const ParamBinding& binding,
                                        const CalibrationSnapshot& cal, const BindOptions& options) {
  if (cal.backend_id != tpl.caps.backend_id) {
    throw Error(codes::kInvalidArgument, "calibration belongs to " + cal.backend_id + ", template to " +
                                             tpl.caps.backend_id);
  }
  if (options.shots < 1 || options.shots > tpl.caps.max_shots) {
    throw Error(codes::kInvalidShots, "shots must be in [1, " + std::to_string(tpl.caps.max_shots) + "]");
  }
  const Duration age = options.now - cal.timestamp;
  if (age > options.staleness_limit) {
    throw Error(codes::kStaleCalibration, "calibration is " + std::to_string(to_seconds(age)) + " s old",
                {{"age_seconds", to_seconds(age)}, {"calibration_ts", to_iso8601(cal.timestamp)}});
  }
  const Duration drift = cal.timestamp > tpl.layout_calibration_ts ? cal.timestamp - tpl.layout_calibration_ts
                                                                    : tpl.layout_calibration_ts - cal.timestamp;
  if (drift > options.staleness_limit) {
    throw Error(codes::kRecompileRequired, "calibration moved " + std::to_string(to_seconds(drift)) +
                                               " s since the layout was chosen",
                {{"template_id", tpl.template_id}});
  }
  Circuit bound = bind_parameters(tpl.routed, binding);
  if (options.adjust_angle) {
    Circuit adjusted(bound.num_qubits(), bound.num_clbits());
    for (auto inst : bound.instructions()) {
      if (inst.gate == Gate::Rz) {
        inst.params[0] = ParamExpr::literal(options.adjust_angle(inst.qubits[0], inst.params[0].offset, cal));
      }
      adjusted.push(std::move(inst));
    }
    bound = std::move(adjusted);
  }
  ExecutablePayload payload;
  payload.estimated_duration_ns = estimate_duration_ns(bound, tpl.caps);
  payload.estimated_fidelity = estimate_fidelity(bound, cal);
  payload.circuit = std::move(bound);
  payload.backend_id = tpl.caps.backend_id;
  payload.shots = options.shots;
  payload.calibration_ts = cal.timestamp;
  payload.template_id = tpl.template_id;
  payload.seed = options.seed;
  return payload;
}

void DurationModel::record(const std::string& backend, double estimated_ns, double observed_ns) {
  if (!(estimated_ns > 0.0) || !(observed_ns >= 0.0)) return;
  std::lock_guard lock(mu_);
  auto [it, inserted] = factor_.try_emplace(backend, 1.0);
  it->second = (1.0 - kAlpha) * it->second + kAlpha * (observed_ns / estimated_ns);
}

void DurationModel::record_feedback(const CompiledTemplate& tpl, const ExecutablePayload& payload,
                                    const ObservedExecution& observed) {
  record(payload.backend_id, static_cast<double>(payload.estimated_duration_ns), observed.duration_ns);
  std::lock_guard lock(mu_);
  log_.push_back({tpl.template_id, payload.backend_id, payload.estimated_fidelity, observed.success_rate});
}

double DurationModel::factor(const std::string& backend) const {
  std::lock_guard lock(mu_);
  auto it = factor_.find(backend);
  return it == factor_.end() ? 1.0 : it->second;
}

std::vector<FidelityRecord> DurationModel::fidelity_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::map<std::string, double> DurationModel::factors() const {
  std::lock_guard lock(mu_);
  return factor_;
}

void DurationModel::restore(std::map<std::string, double> factors) {
  std::lock_guard lock(mu_);
  factor_ = std::move(factors);
}

}  // namespace qrt
