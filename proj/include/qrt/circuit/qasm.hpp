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
#include <string_view>

#include "qrt/circuit/circuit.hpp"

namespace qrt {

/// Parse failure located in the source text (1-based line and column).
class ParseError : public Error {
 public:
  ParseError(const char* code, int line, int col, const std::string& message)
      : Error(code, format(line, col, message), {{"line", line}, {"col", col}}),
        line_(line),
        col_(col) {}

  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int col() const { return col_; }
  [[nodiscard]] bool is_syntax() const { return code() == codes::kSyntaxError; }

 private:
  static std::string format(int line, int col, const std::string& message) {
    return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  }
  int line_;
  int col_;
};

/// Parses the OpenQASM-2-style subset:
///
///   OPENQASM 2.0;            (optional)
///   include "qelib1.inc";    (optional, ignored)
///   input float theta;
///   qreg q[n];  creg c[m];
///   h q[0]; rz(theta+0.5) q[1]; cx q[0],q[1];
///   measure q[0] -> c[0];  barrier q;
///
/// Angle expressions are sums of terms, where a term is a number, `pi`,
/// `k*pi`, `pi/d`, `k*pi/d` or a declared symbol (at most one, with a
/// positive sign). Never aborts on malformed input; throws ParseError.
[[nodiscard]] Circuit parse_qasm(std::string_view text);

/// Emits text that parses back to a structurally equal circuit.
[[nodiscard]] std::string to_qasm(const Circuit& circuit);

}  // namespace qrt
