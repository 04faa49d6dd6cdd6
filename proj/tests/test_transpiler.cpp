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

#include <doctest.h>

#include <numbers>
#include <random>

#include "oracle.hpp"
#include "qrt/transpiler/transpiler.hpp"

using namespace qrt;
using namespace std::chrono_literals;

namespace {

const std::set<std::string> kBasis{"rz", "sx", "x", "cx"};

CalibrationSnapshot flat_calibration(const BackendCapabilities& caps, Timestamp ts = Timestamp{}) {
  CalibrationSnapshot cal;
  cal.backend_id = caps.backend_id;
  cal.timestamp = ts;
  cal.qubits.assign(static_cast<std::size_t>(caps.num_qubits), QubitCalibration{});
  return cal;
}

bool only_basis(const Circuit& c, const std::set<std::string>& basis) {
  for (const auto& inst : c.instructions()) {
    if (is_unitary(inst.gate) && !basis.contains(std::string(gate_name(inst.gate)))) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("every decomposition rule preserves the unitary") {
  const Gate gates[] = {Gate::H, Gate::X, Gate::Y, Gate::Z, Gate::S, Gate::Sdg, Gate::T,
                        Gate::Tdg, Gate::Sx, Gate::Sxdg, Gate::Rx, Gate::Ry, Gate::Rz};
  for (const std::set<std::string>& basis : {kBasis, std::set<std::string>{"rz", "sx", "cx"}}) {
    for (Gate g : gates) {
      for (double theta : {0.0, 0.37, -2.1, std::numbers::pi}) {
        Circuit c(1, 0);
        c.add(g, {0}, is_rotation(g) ? std::vector{ParamExpr::literal(theta)} : std::vector<ParamExpr>{});
        const auto d = decompose(c, basis);
        CAPTURE(gate_name(g));
        CHECK(only_basis(d, basis));
        CHECK(oracle::phase_distance(oracle::unitary(c), oracle::unitary(d)) < 1e-12);
      }
    }
  }
  for (Gate g : {Gate::Cx, Gate::Cz, Gate::Swap}) {
    Circuit c(2, 0);
    c.add(g, {1, 0});
    const auto d = decompose(c, kBasis);
    CHECK(only_basis(d, kBasis));
    CHECK(oracle::phase_distance(oracle::unitary(c), oracle::unitary(d)) < 1e-12);
  }
}

TEST_CASE("decompose examples") {
  Circuit h(1, 0);
  h.add(Gate::H, {0});
  const auto dh = decompose(h, kBasis);
  REQUIRE(dh.size() == 3);
  CHECK(dh.instructions()[0] == Instruction{Gate::Rz, {0}, {ParamExpr::literal(std::numbers::pi / 2)}, {}});
  CHECK(dh.instructions()[1].gate == Gate::Sx);
  CHECK(dh.instructions()[2].gate == Gate::Rz);

  Circuit x(1, 0);
  x.add(Gate::X, {0});
  CHECK(decompose(x, kBasis) == x);

  Circuit sw(2, 0);
  sw.add(Gate::Swap, {0, 1});
  const auto ds = decompose(sw, kBasis);
  REQUIRE(ds.size() == 3);
  CHECK(ds.instructions()[0].qubits == std::vector<int>{0, 1});
  CHECK(ds.instructions()[1].qubits == std::vector<int>{1, 0});
  CHECK(ds.instructions()[2].qubits == std::vector<int>{0, 1});

  try {
    (void)decompose(h, {"cx"});
    FAIL("expected UnsupportedGate");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kUnsupportedGate);
  }
}

TEST_CASE("decompose keeps symbols on rotations") {
  Circuit c(1, 0);
  c.add(Gate::Ry, {0}, {ParamExpr::sym("theta", 0.25)});
  const auto d = decompose(c, kBasis);
  CHECK(d.symbols() == std::set<std::string>{"theta"});
  const ParamBinding b{{"theta", 0.8}};
  CHECK(oracle::phase_distance(oracle::unitary(bind_parameters(c, b)),
                               oracle::unitary(bind_parameters(d, b))) < 1e-12);
}

TEST_CASE("route on a 3-qubit line") {
  const auto caps = line_device("line3", 3);
  Circuit c(3, 0);
  c.add(Gate::Cx, {0, 2});
  const auto r = route(c, caps, {0, 1, 2});
  REQUIRE(r.circuit.size() == 4);
  CHECK(r.circuit.instructions()[0].qubits == std::vector<int>{0, 1});
  CHECK(r.circuit.instructions()[3].qubits == std::vector<int>{1, 2});
  CHECK(r.output_permutation == std::vector<int>{1, 0, 2});

  Circuit prep(3, 0);
  prep.add(Gate::H, {0}).add(Gate::Ry, {2}, {ParamExpr::literal(0.7)});
  Circuit full = prep;
  full.push(c.instructions()[0]);
  Circuit routed = prep;
  for (const auto& inst : r.circuit.instructions()) routed.push(inst);
  const auto expect = oracle::embed_state(oracle::state(full), r.output_permutation, 3);
  CHECK(oracle::phase_distance(expect, oracle::state(routed)) < 1e-12);

  Circuit adjacent(2, 0);
  adjacent.add(Gate::Cx, {0, 1});
  const auto ra = route(adjacent, caps, {0, 1});
  CHECK(ra.circuit.size() == 1);
  CHECK(ra.output_permutation == std::vector<int>{0, 1});
}

TEST_CASE("route reports disconnected devices") {
  BackendCapabilities caps = line_device("split", 4);
  caps.coupling = {{0, 1}, {2, 3}};
  Circuit c(4, 0);
  c.add(Gate::Cx, {0, 3});
  try {
    (void)route(c, caps, {0, 1, 2, 3});
    FAIL("expected DisconnectedQubits");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kDisconnectedQubits);
  }
}

TEST_CASE("compiled fuzz circuits are routed and equivalent") {
  std::mt19937_64 rng(2024);
  const BackendCapabilities devices[] = {line_device("line5", 5), ring_device("ring5", 5),
                                         line_device("line7", 7)};
  for (int trial = 0; trial < 150; ++trial) {
    const auto& caps = devices[trial % 3];
    const auto c = oracle::random_circuit(rng, 5, 20);
    const auto cal = oracle::random_calibration(rng, caps);
    const auto tpl = compile_template(c, caps, cal);
    CHECK(only_basis(tpl.routed, caps.basis_gates));
    for (const auto& inst : tpl.routed.instructions()) {
      if (inst.qubits.size() == 2) CHECK(caps.coupled(inst.qubits[0], inst.qubits[1]));
    }
    const auto expect = oracle::embed_state(oracle::state(c), tpl.output_permutation, caps.num_qubits);
    CHECK(oracle::phase_distance(expect, oracle::state(tpl.routed)) < 1e-9);
  }
}

TEST_CASE("measurements stay on logical clbits after routing") {
  const auto caps = line_device("line3", 3);
  Circuit c(3, 3);
  c.add(Gate::X, {0}).add(Gate::Cx, {0, 2});
  c.measure(0, 0).measure(1, 1).measure(2, 2);
  const auto r = route(c, caps, {0, 1, 2});
  for (const auto& inst : r.circuit.instructions()) {
    if (inst.gate == Gate::Measure) CHECK(inst.qubits[0] == r.output_permutation[inst.clbits[0]]);
  }
}

TEST_CASE("select_layout examples") {
  const auto line3 = line_device("line3", 3);
  auto cal = flat_calibration(line3);
  cal.gates[GateKey::make("cx", {0, 1})] = {0.05, 300};
  cal.gates[GateKey::make("cx", {1, 2})] = {0.01, 300};
  Circuit pair(2, 0);
  pair.add(Gate::Cx, {0, 1});
  CHECK(select_layout(pair, line3, cal) == Layout{1, 2});

  const auto line2 = line_device("line2", 2);
  auto ro = flat_calibration(line2);
  ro.qubits[0].readout_error = 0.10;
  ro.qubits[1].readout_error = 0.02;
  Circuit m(1, 1);
  m.measure(0, 0);
  CHECK(select_layout(m, line2, ro) == Layout{1});

  Circuit three(3, 0);
  three.add(Gate::Cx, {0, 1}).add(Gate::Cx, {1, 2});
  CHECK(select_layout(three, line_device("line5", 5), flat_calibration(line_device("line5", 5))) ==
        Layout{0, 1, 2});
}

TEST_CASE("select_layout matches brute force on small devices") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto caps = trial % 2 ? ring_device("r", n) : line_device("l", n);
    auto c = decompose(oracle::random_circuit(rng, std::min(n, 4), 12, true), caps.basis_gates);
    const auto cal = oracle::random_calibration(rng, caps);
    const auto [best, best_layout] = oracle::brute_force_layout(c, caps, cal);
    const auto layout = select_layout(c, caps, cal);
    CHECK(oracle::score(c, caps, cal, layout) == best);
    CHECK(layout == best_layout);
  }
}

TEST_CASE("greedy layout on larger devices is injective and routable") {
  std::mt19937_64 rng(8);
  const auto caps = ring_device("ring9", 9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = decompose(oracle::random_circuit(rng, 6, 20), caps.basis_gates);
    const auto layout = select_layout(c, caps, oracle::random_calibration(rng, caps));
    std::set<int> distinct(layout.begin(), layout.end());
    CHECK(distinct.size() == layout.size());
    CHECK(*distinct.begin() >= 0);
    CHECK(*distinct.rbegin() < caps.num_qubits);
  }
}

TEST_CASE("compile_template records layout calibration and count") {
  const auto caps = line_device("line5", 5);
  const Timestamp t0 = parse_iso8601("2026-01-01T00:00:00Z");
  const auto cal = flat_calibration(caps, t0);
  Circuit c(2, 2);
  c.add(Gate::Ry, {0}, {ParamExpr::sym("theta")}).add(Gate::Cx, {0, 1});
  c.measure(0, 0).measure(1, 1);
  const auto tpl = compile_template(c, caps, cal);
  CHECK(tpl.compile_count == 1);
  CHECK(tpl.layout_calibration_ts == t0);
  CHECK(tpl.routed.symbols() == std::set<std::string>{"theta"});
  CHECK_FALSE(tpl.template_id.empty());

  for (int i = 0; i < 100; ++i) {
    BindOptions opts;
    opts.now = t0 + 1s;
    const auto payload = bind_with_calibration(tpl, {{"theta", 0.01 * i}}, cal, opts);
    CHECK(payload.circuit.symbols().empty());
  }
  CHECK(tpl.compile_count == 1);
  CHECK(recompile(tpl, cal).compile_count == 2);

  Circuit plain(1, 0);
  plain.add(Gate::H, {0});
  CHECK(compile_template(plain, caps, cal).routed.symbols().empty());

  Circuit wide(6, 0);
  CHECK_THROWS_AS((void)compile_template(wide, caps, cal), Error);

  BackendCapabilities no_sx = caps;
  no_sx.basis_gates = {"rz", "cx"};
  try {
    (void)compile_template(plain, no_sx, cal);
    FAIL("expected UnsupportedGate");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kUnsupportedGate);
  }
}

TEST_CASE("bind_with_calibration estimates fidelity and duration") {
  auto caps = line_device("one", 1);
  caps.timing_granularity_ns = 16;
  const Timestamp t0 = parse_iso8601("2026-01-01T00:00:00Z");
  auto cal = flat_calibration(caps, t0);
  cal.gates[GateKey::make("sx", {0})] = {0.01, 35};
  cal.qubits[0].readout_error = 0.02;
  Circuit c(1, 1);
  c.add(Gate::Sx, {0}).add(Gate::Sx, {0});
  c.measure(0, 0);
  const auto tpl = compile_template(c, caps, cal);
  BindOptions opts;
  opts.now = t0;
  opts.shots = 500;
  const auto p = bind_with_calibration(tpl, {}, cal, opts);
  CHECK(p.estimated_fidelity == doctest::Approx(0.99 * 0.99 * 0.98).epsilon(1e-12));
  CHECK(std::abs(p.estimated_fidelity - 0.960498) < 1e-12);
  // 35 + 35 + 1000 = 1070, rounded up to a multiple of 16.
  CHECK(p.estimated_duration_ns == 1072);
  CHECK(p.calibration_ts == t0);
  CHECK(p.shots == 500);

  auto clean = flat_calibration(caps, t0);
  CHECK(bind_with_calibration(tpl, {}, clean, opts).estimated_fidelity == 1.0);

  opts.shots = 0;
  CHECK_THROWS_AS((void)bind_with_calibration(tpl, {}, cal, opts), Error);
}

TEST_CASE("staleness and recompile signals") {
  const auto caps = line_device("line2", 2);
  const Timestamp t0 = parse_iso8601("2026-01-01T00:00:00Z");
  Circuit c(1, 0);
  c.add(Gate::Rz, {0}, {ParamExpr::sym("a")});
  const auto tpl = compile_template(c, caps, flat_calibration(caps, t0));
  BindOptions opts;
  opts.now = t0;
  CHECK_NOTHROW((void)bind_with_calibration(tpl, {{"a", 1}}, flat_calibration(caps, t0), opts));

  opts.now = t0 + 10min;
  opts.staleness_limit = 5min;
  try {
    (void)bind_with_calibration(tpl, {{"a", 1}}, flat_calibration(caps, t0), opts);
    FAIL("expected StaleCalibration");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kStaleCalibration);
  }

  try {
    (void)bind_with_calibration(tpl, {{"a", 1}}, flat_calibration(caps, t0 + 9min), opts);
    FAIL("expected RecompileRequired");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kRecompileRequired);
  }
  const auto fresh = flat_calibration(caps, t0 + 9min);
  const auto again = recompile(tpl, fresh);
  CHECK_NOTHROW((void)bind_with_calibration(again, {{"a", 1}}, fresh, opts));

  try {
    (void)bind_with_calibration(tpl, {}, flat_calibration(caps, t0), BindOptions{.now = t0});
    FAIL("expected UnboundSymbol");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kUnboundSymbol);
  }
}

TEST_CASE("angle adjuster hook sees every rz") {
  const auto caps = line_device("line2", 2);
  Circuit c(1, 0);
  c.add(Gate::Rz, {0}, {ParamExpr::sym("a")});
  const auto cal = flat_calibration(caps);
  const auto tpl = compile_template(c, caps, cal);
  BindOptions opts;
  opts.adjust_angle = [](int, double angle, const CalibrationSnapshot&) { return angle + 0.5; };
  const auto p = bind_with_calibration(tpl, {{"a", 1.0}}, cal, opts);
  CHECK(p.circuit.instructions()[0].params[0].offset == 1.5);
}

TEST_CASE("duration model EWMA") {
  DurationModel model;
  model.record("b", 100, 200);
  CHECK(model.adjust("b", 100) == doctest::Approx(120));

  DurationModel same;
  same.record("b", 100, 100);
  CHECK(same.adjust("b", 100) == 100);

  DurationModel conv;
  double last = conv.adjust("b", 100);
  for (int i = 0; i < 3; ++i) {
    conv.record("b", 100, 300);
    const double now = conv.adjust("b", 100);
    CHECK(now > last);
    CHECK(now < 300);
    last = now;
  }
  CHECK(conv.factor("other") == 1.0);
}

TEST_CASE("record_feedback logs fidelity next to estimate") {
  DurationModel model;
  CompiledTemplate tpl;
  tpl.template_id = "tpl-1";
  ExecutablePayload p;
  p.backend_id = "b";
  p.estimated_duration_ns = 100;
  p.estimated_fidelity = 0.9;
  model.record_feedback(tpl, p, {200, 0.85});
  const auto log = model.fidelity_log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].estimated_fidelity == 0.9);
  CHECK(log[0].observed_success_rate == 0.85);
  CHECK(model.factor("b") == doctest::Approx(1.2));
}
