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

#include "qrt/circuit/qasm.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace qrt {

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space_and_comments();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (is_ident_start(c)) {
      t.kind = Tok::Ident;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) t.text += take();
      return t;
    }
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      t.kind = Tok::Number;
      while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) t.text += take();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        t.text += take();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) t.text += take();
        while (pos_ < src_.size() && is_digit(src_[pos_])) t.text += take();
      }
      return t;
    }
    if (c == '"') {
      t.kind = Tok::String;
      take();
      while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') t.text += take();
      if (pos_ >= src_.size() || src_[pos_] != '"') {
        throw ParseError(codes::kSyntaxError, t.line, t.col, "unterminated string literal");
      }
      take();
      return t;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      t.kind = Tok::Punct;
      t.text = "->";
      take();
      take();
      return t;
    }
    static constexpr std::string_view kPunct = ";,[]()+-*/";
    if (kPunct.find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, take());
      return t;
    }
    throw ParseError(codes::kSyntaxError, t.line, t.col,
                     "unexpected character (byte 0x" + hex(static_cast<unsigned char>(c)) + ")");
  }

 private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }
  static std::string hex(unsigned char c) {
    static constexpr char kDigits[] = "0123456789abcdef";
    return {kDigits[c >> 4], kDigits[c & 0xf]};
  }

  char take() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

constexpr int kMaxRegister = 1024;

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  Circuit parse() {
    if (is_ident("OPENQASM")) {
      advance();
      expect_kind(Tok::Number, "version number");
      expect_punct(";");
    }
    while (cur_.kind != Tok::End) statement();
    return std::move(circuit_);
  }

 private:
  void advance() { cur_ = lex_.next(); }

  [[noreturn]] void syntax(const Token& at, const std::string& msg) const {
    throw ParseError(codes::kSyntaxError, at.line, at.col, msg);
  }
  [[noreturn]] void semantic(const Token& at, const std::string& msg) const {
    throw ParseError(codes::kSemanticError, at.line, at.col, msg);
  }

  [[nodiscard]] bool is_ident(std::string_view word) const {
    return cur_.kind == Tok::Ident && cur_.text == word;
  }
  [[nodiscard]] bool is_punct(std::string_view p) const {
    return cur_.kind == Tok::Punct && cur_.text == p;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::String: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  Token expect_kind(Tok kind, const char* what) {
    if (cur_.kind != kind) syntax(cur_, std::string("expected ") + what + ", found " + describe(cur_));
    Token t = cur_;
    advance();
    return t;
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) syntax(cur_, "expected '" + std::string(p) + "', found " + describe(cur_));
    advance();
  }

  int expect_index() {
    const Token t = expect_kind(Tok::Number, "integer");
    int value = 0;
    const auto* end = t.text.data() + t.text.size();
    auto [ptr, ec] = std::from_chars(t.text.data(), end, value);
    if (ec == std::errc::result_out_of_range) semantic(t, "integer out of range");
    if (ec != std::errc() || ptr != end) syntax(t, "expected integer, found '" + t.text + "'");
    return value;
  }

  void statement() {
    const Token head = cur_;
    if (head.kind != Tok::Ident) syntax(head, "expected statement, found " + describe(head));
    advance();
    if (head.text == "include") {
      expect_kind(Tok::String, "file name");
      expect_punct(";");
    } else if (head.text == "input") {
      const Token type = expect_kind(Tok::Ident, "type");
      if (type.text != "float" && type.text != "angle") {
        semantic(type, "input parameters must be declared 'float'");
      }
      const Token name = expect_kind(Tok::Ident, "parameter name");
      if (name.text == "pi") semantic(name, "'pi' is reserved");
      expect_punct(";");
      if (circuit_.symbols().contains(name.text)) semantic(name, "duplicate parameter '" + name.text + "'");
      circuit_.declare_symbol(name.text);
    } else if (head.text == "qreg" || head.text == "creg") {
      register_decl(head);
    } else if (head.text == "measure") {
      measure_stmt(head);
    } else if (head.text == "barrier") {
      Instruction inst{Gate::Barrier, {}, {}, {}};
      arg_list(inst.qubits, true);
      expect_punct(";");
      emit(head, std::move(inst));
    } else {
      gate_stmt(head);
    }
  }

  void register_decl(const Token& head) {
    const bool quantum = head.text == "qreg";
    const Token name = expect_kind(Tok::Ident, "register name");
    expect_punct("[");
    const Token size_tok = cur_;
    const int size = expect_index();
    expect_punct("]");
    expect_punct(";");
    if (size < 1 || size > kMaxRegister) semantic(size_tok, "register size must be in [1, 1024]");
    auto& declared = quantum ? qreg_ : creg_;
    if (declared) semantic(head, std::string("only one ") + (quantum ? "qreg" : "creg") + " is supported");
    declared = name.text;
    if (quantum) {
      rebuild(size, circuit_.num_clbits());
    } else {
      rebuild(circuit_.num_qubits(), size);
    }
  }

  void rebuild(int nq, int nc) {
    if (!circuit_.instructions().empty()) {
      syntax(cur_, "register declarations must precede instructions");
    }
    Circuit next(nq, nc);
    for (const auto& s : circuit_.symbols()) next.declare_symbol(s);
    circuit_ = std::move(next);
  }

  // Parses `reg[i]` or, when whole registers are allowed, `reg`.
  void arg(std::vector<int>& out, bool allow_whole, const std::optional<std::string>& reg,
           int reg_size, const char* kind) {
    const Token name = expect_kind(Tok::Ident, kind);
    if (!reg) semantic(name, std::string("no ") + kind + " register declared");
    if (name.text != *reg) semantic(name, "unknown register '" + name.text + "'");
    if (!is_punct("[")) {
      if (!allow_whole) syntax(cur_, "expected '[' after register name");
      for (int i = 0; i < reg_size; ++i) out.push_back(i);
      return;
    }
    advance();
    const Token idx_tok = cur_;
    const int idx = expect_index();
    expect_punct("]");
    if (idx >= reg_size) {
      semantic(idx_tok, std::string(kind) + " index " + std::to_string(idx) + " out of range (size " +
                            std::to_string(reg_size) + ")");
    }
    out.push_back(idx);
  }

  void arg_list(std::vector<int>& out, bool allow_whole) {
    arg(out, allow_whole, qreg_, circuit_.num_qubits(), "qubit");
    while (is_punct(",")) {
      advance();
      arg(out, allow_whole, qreg_, circuit_.num_qubits(), "qubit");
    }
  }

  void measure_stmt(const Token& head) {
    std::vector<int> qubits, clbits;
    arg(qubits, true, qreg_, circuit_.num_qubits(), "qubit");
    expect_punct("->");
    arg(clbits, true, creg_, circuit_.num_clbits(), "clbit");
    expect_punct(";");
    if (qubits.size() != clbits.size()) semantic(head, "measure register sizes differ");
    for (std::size_t i = 0; i < qubits.size(); ++i) {
      emit(head, Instruction{Gate::Measure, {qubits[i]}, {}, {clbits[i]}});
    }
  }

  void gate_stmt(const Token& head) {
    const auto gate = gate_from_name(head.text);
    if (!gate || *gate == Gate::Measure || *gate == Gate::Barrier) {
      semantic(head, "unknown gate '" + head.text + "'");
    }
    Instruction inst{*gate, {}, {}, {}};
    if (is_punct("(")) {
      advance();
      inst.params.push_back(expression());
      while (is_punct(",")) {
        advance();
        inst.params.push_back(expression());
      }
      expect_punct(")");
    }
    arg_list(inst.qubits, false);
    expect_punct(";");
    emit(head, std::move(inst));
  }

  void emit(const Token& at, Instruction inst) {
    if (auto why = check_instruction(inst, circuit_.num_qubits(), circuit_.num_clbits(),
                                     circuit_.symbols())) {
      semantic(at, *why);
    }
    circuit_.push(std::move(inst));
  }

  // expr := ['+'|'-'] term (('+'|'-') term)*
  ParamExpr expression() {
    ParamExpr out;
    bool first = true;
    while (true) {
      double sign = 1.0;
      if (is_punct("+") || is_punct("-")) {
        sign = is_punct("-") ? -1.0 : 1.0;
        advance();
      } else if (!first) {
        break;
      }
      const Token at = cur_;
      auto [symbol, value] = term();
      if (symbol) {
        if (out.symbol) semantic(at, "at most one symbol per expression");
        if (sign < 0) semantic(at, "symbols may only be added, not subtracted");
        out.symbol = std::move(symbol);
      } else {
        out.offset += sign * value;
      }
      first = false;
    }
    if (!std::isfinite(out.offset)) semantic(cur_, "angle is not finite");
    return out;
  }

  // term := factor (('*'|'/') factor)* ; a symbol must stand alone.
  std::pair<std::optional<std::string>, double> term() {
    const Token at = cur_;
    auto [symbol, value] = factor();
    bool compound = false;
    while (is_punct("*") || is_punct("/")) {
      const bool mul = is_punct("*");
      advance();
      const Token rhs_at = cur_;
      auto [rhs_symbol, rhs] = factor();
      if (rhs_symbol) semantic(rhs_at, "symbols cannot be scaled");
      if (!mul && rhs == 0.0) semantic(rhs_at, "division by zero");
      value = mul ? value * rhs : value / rhs;
      compound = true;
    }
    if (symbol && compound) semantic(at, "symbols cannot be scaled");
    return {std::move(symbol), value};
  }

  std::pair<std::optional<std::string>, double> factor() {
    const Token t = cur_;
    if (t.kind == Tok::Number) {
      advance();
      double v = 0.0;
      const auto* end = t.text.data() + t.text.size();
      auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
      if (ec != std::errc() || ptr != end) syntax(t, "malformed number '" + t.text + "'");
      return {std::nullopt, v};
    }
    if (t.kind == Tok::Ident) {
      advance();
      if (t.text == "pi") return {std::nullopt, std::numbers::pi};
      if (!circuit_.symbols().contains(t.text)) semantic(t, "undeclared symbol '" + t.text + "'");
      return {t.text, 0.0};
    }
    syntax(t, "expected angle expression, found " + describe(t));
  }

  Lexer lex_;
  Token cur_;
  Circuit circuit_;
  std::optional<std::string> qreg_;
  std::optional<std::string> creg_;
};

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_param(const ParamExpr& p) {
  if (!p.symbol) return format_double(p.offset);
  if (p.offset == 0.0) return *p.symbol;
  if (p.offset < 0) return *p.symbol + "-" + format_double(-p.offset);
  return *p.symbol + "+" + format_double(p.offset);
}

}  // namespace

Circuit parse_qasm(std::string_view text) { return Parser(text).parse(); }

std::string to_qasm(const Circuit& circuit) {
  std::ostringstream out;
  out << "OPENQASM 2.0;\n";
  for (const auto& s : circuit.symbols()) out << "input float " << s << ";\n";
  if (circuit.num_qubits() > 0) out << "qreg q[" << circuit.num_qubits() << "];\n";
  if (circuit.num_clbits() > 0) out << "creg c[" << circuit.num_clbits() << "];\n";
  for (const auto& inst : circuit.instructions()) {
    if (inst.gate == Gate::Measure) {
      out << "measure q[" << inst.qubits[0] << "] -> c[" << inst.clbits[0] << "];\n";
      continue;
    }
    out << gate_name(inst.gate);
    if (!inst.params.empty()) {
      out << '(';
      for (std::size_t i = 0; i < inst.params.size(); ++i) {
        if (i) out << ',';
        out << format_param(inst.params[i]);
      }
      out << ')';
    }
    for (std::size_t i = 0; i < inst.qubits.size(); ++i) {
      out << (i ? "," : " ") << "q[" << inst.qubits[i] << ']';
    }
    out << ";\n";
  }
  return out.str();
}

}  // namespace qrt
