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
#include "qrt/circuit/qasm.hpp"
#include "qrt/circuit/validate.hpp"

using namespace qrt;

namespace {

int parse_error_kind(std::string_view text) {
  try {
    (void)parse_qasm(text);
  } catch (const ParseError& e) {
    return e.is_syntax() ? 1 : 2;
  }
  return 0;
}

}  // namespace

TEST_CASE("parse Bell program") {
  const auto c = parse_qasm(
      "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];");
  CHECK(c.num_qubits() == 2);
  CHECK(c.num_clbits() == 2);
  REQUIRE(c.size() == 4);
  CHECK(c.instructions()[1].gate == Gate::Cx);
  CHECK(c.instructions()[1].qubits == std::vector<int>{0, 1});
  CHECK(c.instructions()[3].clbits == std::vector<int>{1});
}

TEST_CASE("parse declares input parameters") {
  const auto c = parse_qasm("input float theta; qreg q[1]; rz(theta) q[0];");
  CHECK(c.symbols() == std::set<std::string>{"theta"});
  CHECK(c.instructions()[0].params[0] == ParamExpr::sym("theta"));
}

TEST_CASE("parse rejects out-of-range qubit with location") {
  try {
    (void)parse_qasm("qreg q[1];\ncx q[0],q[1];");
    FAIL("expected SemanticError");
  } catch (const ParseError& e) {
    CHECK(e.code() == codes::kSemanticError);
    CHECK(e.line() == 2);
    CHECK(e.col() == 11);
  }
}

TEST_CASE("parse angle expressions") {
  const auto c = parse_qasm(
      "OPENQASM 2.0;\ninclude \"qelib1.inc\";\ninput float t;\nqreg q[1];\n"
      "rz(3*pi/4) q[0]; rx(-pi/2) q[0]; ry(t-0.25) q[0]; rz(0.5+t) q[0]; rz(pi) q[0]; rz(1e-3) q[0];");
  const auto& in = c.instructions();
  CHECK(in[0].params[0].offset == doctest::Approx(3 * std::numbers::pi / 4));
  CHECK(in[1].params[0].offset == doctest::Approx(-std::numbers::pi / 2));
  CHECK(in[2].params[0] == ParamExpr::sym("t", -0.25));
  CHECK(in[3].params[0] == ParamExpr::sym("t", 0.5));
  CHECK(in[4].params[0].offset == std::numbers::pi);
  CHECK(in[5].params[0].offset == 1e-3);
}

TEST_CASE("parse whole-register barrier and measure") {
  const auto c = parse_qasm("qreg q[3]; creg c[3]; barrier q; measure q -> c;");
  CHECK(c.instructions()[0].qubits == std::vector<int>{0, 1, 2});
  CHECK(c.measurements().size() == 3);
}

TEST_CASE("parse errors are classified") {
  CHECK(parse_error_kind("qreg q[1]; h q[0]") == 1);                   // missing ';'
  CHECK(parse_error_kind("qreg q[1]; foo q[0];") == 2);                // unknown gate
  CHECK(parse_error_kind("qreg q[1]; rz(theta) q[0];") == 2);          // undeclared symbol
  CHECK(parse_error_kind("qreg q[1]; h(0.1) q[0];") == 2);             // params on fixed gate
  CHECK(parse_error_kind("qreg q[1]; rz q[0];") == 2);                 // missing param
  CHECK(parse_error_kind("qreg q[2]; cx q[0],q[0];") == 2);            // repeated operand
  CHECK(parse_error_kind("qreg q[2]; cx q[0];") == 2);                 // arity
  CHECK(parse_error_kind("qreg q[2]; creg c[1]; measure q[1] -> c[1];") == 2);
  CHECK(parse_error_kind("input float t; qreg q[1]; rz(2*t) q[0];") == 2);
  CHECK(parse_error_kind("input float t; qreg q[1]; rz(-t) q[0];") == 2);
  CHECK(parse_error_kind("qreg q[1]; qreg r[1];") == 2);
  CHECK(parse_error_kind("qreg q[1]; h q[0]; creg c[1];") == 1);
  CHECK(parse_error_kind("qreg q[1]; h q[0]; $") == 1);
  CHECK(parse_error_kind("qreg q[99999999999]; ") == 2);
  CHECK(parse_error_kind("") == 0);
}

TEST_CASE("serialize emits readable statements") {
  Circuit c(1, 0);
  c.add(Gate::H, {0});
  CHECK(to_qasm(c).find("h q[0];") != std::string::npos);

  Circuit p(1, 0);
  p.add(Gate::Rz, {0}, {ParamExpr::sym("theta")});
  CHECK(to_qasm(p).find("input float theta;") != std::string::npos);
}

TEST_CASE("round trip over random circuits") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = oracle::random_circuit(rng, 6, 25, trial % 2 == 0, trial % 3 == 0);
    const auto text = to_qasm(c);
    CAPTURE(text);
    CHECK(parse_qasm(text) == c);
  }
}

TEST_CASE("bind substitutes symbols") {
  Circuit c(1, 0);
  c.add(Gate::Rz, {0}, {ParamExpr::sym("theta")});
  const auto b = bind_parameters(c, {{"theta", 1.5708}});
  CHECK(b.symbols().empty());
  CHECK(b.instructions()[0].params[0] == ParamExpr::literal(1.5708));

  Circuit sum(1, 0);
  sum.add(Gate::Rz, {0}, {ParamExpr::sym("theta", 0.5)});
  CHECK(bind_parameters(sum, {{"theta", 1.0}}).instructions()[0].params[0].offset == 1.5);

  Circuit plain(1, 0);
  plain.add(Gate::H, {0});
  CHECK(bind_parameters(plain, {}) == plain);

  try {
    (void)bind_parameters(c, {{"phi", 1.0}});
    FAIL("expected UnboundSymbol");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kUnboundSymbol);
    CHECK(e.details()["symbol"] == "theta");
  }
}

TEST_CASE("bind is idempotent and commutes with serialize") {
  std::mt19937_64 rng(5);
  const ParamBinding values{{"theta", 0.3}, {"phi", -1.25}};
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = oracle::random_circuit(rng, 4, 15, true, true);
    const auto b = bind_parameters(c, values);
    CHECK(bind_parameters(b, values) == b);
    CHECK(parse_qasm(to_qasm(b)) == bind_parameters(parse_qasm(to_qasm(c)), values));
  }
}

TEST_CASE("validate against capabilities") {
  const auto caps = line_device("dev", 5);
  Circuit two(2, 0);
  two.add(Gate::Cx, {0, 1});
  CHECK(validate(two, caps).empty());

  Circuit six(6, 0);
  const auto v = validate(six, caps);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::TooManyQubits);
  CHECK_FALSE(v[0].transpilable);

  Circuit h(1, 0);
  h.add(Gate::H, {0});
  const auto vh = validate(h, caps);
  REQUIRE(vh.size() == 1);
  CHECK(vh[0] == Violation{Violation::Kind::NonBasisGate, "h", true});

  Circuit far(3, 0);
  far.add(Gate::Cx, {0, 2});
  CHECK(validate(far, caps)[0].kind == Violation::Kind::UncoupledPair);
}

TEST_CASE("parser never aborts on arbitrary bytes") {
  std::mt19937_64 rng(99);
  const std::string seed_prog =
      "OPENQASM 2.0;\ninput float a;\nqreg q[3];\ncreg c[3];\nh q[0];\nrz(a+pi/2) q[1];\n"
      "cx q[0],q[2];\nbarrier q;\nmeasure q[2] -> c[1];\n";
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text;
    if (trial % 2 == 0) {
      text.resize(rng() % 80);
      for (auto& ch : text) ch = static_cast<char>(rng() & 0xff);
    } else {
      text = seed_prog;
      const int edits = 1 + static_cast<int>(rng() % 4);
      for (int e = 0; e < edits && !text.empty(); ++e) {
        const auto pos = rng() % text.size();
        switch (rng() % 3) {
          case 0: text[pos] = static_cast<char>(rng() & 0xff); break;
          case 1: text.erase(pos, 1 + rng() % 5); break;
          default: text.insert(pos, 1, "[];(),->*/+q0123456789"[rng() % 22]); break;
        }
      }
    }
    try {
      const auto c = parse_qasm(text);
      // Whatever parses must satisfy the invariants and round trip.
      CHECK(parse_qasm(to_qasm(c)) == c);
    } catch (const ParseError& e) {
      CHECK(e.line() >= 1);
      CHECK(e.col() >= 1);
    }
  }
}
