// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/clause.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "clinlogic/error.hpp"

namespace clinlogic {

std::string_view to_string(CmpOp op) noexcept {
  switch (op) {
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
    case CmpOp::eq: return "=";
  }
  return "<";
}

bool holds(CmpOp op, double value, double constant) noexcept {
  switch (op) {
    case CmpOp::lt: return value < constant;
    case CmpOp::le: return value <= constant;
    case CmpOp::gt: return value > constant;
    case CmpOp::ge: return value >= constant;
    case CmpOp::eq: return value == constant;
  }
  return false;
}

std::string format_number(double value) {
  char buf[64];
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 1e15) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
    return std::string(buf, end);
  }
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

namespace {

const char* var_name(Var v) { return v == Var::x ? "x" : "y"; }

}  // namespace

std::string to_string(const Atom& atom) {
  std::string s;
  switch (atom.form) {
    case AtomForm::kind:
      s = atom.name + "(" + var_name(atom.subject) + ")";
      break;
    case AtomForm::attr_eq:
      s = "attr_eq(" + std::string(var_name(atom.subject)) + ", " + atom.name + ", " + atom.value + ")";
      break;
    case AtomForm::rel:
      s = "rel(" + std::string(var_name(atom.subject)) + ", " + var_name(atom.object) + ", " + atom.name + ")";
      break;
    case AtomForm::cmp:
      s = "cmp(" + std::string(var_name(atom.subject)) + ", " + atom.name + ", " + std::string(to_string(atom.op)) +
          ", " + format_number(atom.constant) + ")";
      break;
    case AtomForm::neighbor_attr:
      s = atom.neighbor_kind + "_attr(" + var_name(atom.subject) + ", " + atom.name + ", " + atom.value + ")";
      break;
  }
  return s;
}

std::string to_string(const Clause& clause) {
  std::string s;
  for (std::size_t i = 0; i < clause.body.size(); ++i) {
    if (i) s += ", ";
    s += to_string(clause.body[i]);
  }
  s += " -> ";
  s += to_string(clause.head);
  return s;
}

bool Clause::uses_y() const noexcept {
  if (head.mentions(Var::y)) return true;
  for (const auto& a : body) {
    if (a.mentions(Var::y)) return true;
  }
  return false;
}

namespace {

enum class Tok { word, lparen, rparen, comma, arrow, end };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::end, {}, start};
    const char c = src_[pos_];
    if (c == '(') return single(Tok::lparen);
    if (c == ')') return single(Tok::rparen);
    if (c == ',') return single(Tok::comma);
    if (src_.substr(pos_, 2) == "->") {
      pos_ += 2;
      return {Tok::arrow, src_.substr(start, 2), start};
    }
    while (pos_ < src_.size()) {
      const char d = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ',') break;
      if (src_.substr(pos_, 2) == "->") break;
      ++pos_;
    }
    return {Tok::word, src_.substr(start, pos_ - start), start};
  }

 private:
  Token single(Tok kind) {
    const std::size_t start = pos_++;
    return {kind, src_.substr(start, 1), start};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

bool is_identifier(std::string_view w) {
  if (w.empty() || !(std::isalpha(static_cast<unsigned char>(w[0])) || w[0] == '_')) return false;
  for (char c : w) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

class Parser {
 public:
  Parser(std::string_view text, const Schema& schema) : lexer_(text), schema_(schema) { advance(); }

  Clause clause() {
    Clause c;
    if (tok_.kind == Tok::arrow) fail("an atom (clause body is empty)");
    c.body.push_back(atom());
    while (tok_.kind == Tok::comma) {
      advance();
      c.body.push_back(atom());
    }
    expect(Tok::arrow, "',' or '->'");
    c.head = atom();
    if (tok_.kind != Tok::end) fail("end of clause");
    check_structure(c);
    return c;
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& expected) const {
    std::ostringstream os;
    os << "at offset " << tok_.pos << ": expected " << expected << ", found ";
    if (tok_.kind == Tok::end) {
      os << "end of input";
    } else {
      os << "'" << tok_.text << "'";
    }
    throw Error(ErrorCode::syntax_error, os.str());
  }

  [[noreturn]] void unknown(const std::string& what) const {
    throw Error(ErrorCode::unknown_symbol, what);
  }

  void expect(Tok kind, const std::string& expected) {
    if (tok_.kind != kind) fail(expected);
    advance();
  }

  std::string_view word(const std::string& expected) {
    if (tok_.kind != Tok::word) fail(expected);
    auto w = tok_.text;
    advance();
    return w;
  }

  Var variable() {
    auto w = word("a variable (x or y)");
    if (w == "x") return Var::x;
    if (w == "y") return Var::y;
    throw Error(ErrorCode::syntax_error, "expected a variable (x or y), found '" + std::string(w) + "'");
  }

  std::string identifier(const std::string& expected) {
    const std::size_t pos = tok_.pos;
    auto w = word(expected);
    if (!is_identifier(w)) {
      throw Error(ErrorCode::syntax_error,
                  "at offset " + std::to_string(pos) + ": expected " + expected + ", found '" + std::string(w) + "'");
    }
    return std::string(w);
  }

  CmpOp comparison() {
    auto w = word("a comparison operator (<, <=, >, >=, =)");
    if (w == "<") return CmpOp::lt;
    if (w == "<=" || w == "≤") return CmpOp::le;
    if (w == ">") return CmpOp::gt;
    if (w == ">=" || w == "≥") return CmpOp::ge;
    if (w == "=" || w == "==") return CmpOp::eq;
    throw Error(ErrorCode::syntax_error, "expected a comparison operator, found '" + std::string(w) + "'");
  }

  double number() {
    auto w = word("a numeric constant");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
    if (ec != std::errc{} || ptr != w.data() + w.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::syntax_error, "expected a numeric constant, found '" + std::string(w) + "'");
    }
    return value;
  }

  void check_value(const std::string& attribute, const std::string& value,
                   const std::vector<KindId>& kinds) const {
    bool typed = false;
    for (KindId k : kinds) {
      const auto& spec = schema_.kind(k).attributes[*schema_.kind(k).slot(attribute)];
      if (spec.type != AttrType::categorical && spec.type != AttrType::boolean) continue;
      typed = true;
      if (spec.symbol(value)) return;
    }
    if (!typed) unknown("attribute '" + attribute + "' is not categorical");
    unknown("value '" + value + "' is not in the vocabulary of '" + attribute + "'");
  }

  Atom atom() {
    const std::string name = identifier("a predicate name");
    expect(Tok::lparen, "'('");
    Atom a;
    if (name == "attr_eq") {
      a.form = AtomForm::attr_eq;
      a.subject = variable();
      expect(Tok::comma, "','");
      a.name = identifier("an attribute name");
      expect(Tok::comma, "','");
      a.value = std::string(word("a value"));
      auto kinds = schema_.kinds_with_attribute(a.name);
      if (kinds.empty()) unknown("attribute '" + a.name + "'");
      check_value(a.name, a.value, kinds);
    } else if (name == "cmp") {
      a.form = AtomForm::cmp;
      a.subject = variable();
      expect(Tok::comma, "','");
      a.name = identifier("an attribute name");
      expect(Tok::comma, "','");
      a.op = comparison();
      expect(Tok::comma, "','");
      a.constant = number();
      auto kinds = schema_.kinds_with_attribute(a.name);
      if (kinds.empty()) unknown("attribute '" + a.name + "'");
      bool numeric = false;
      for (KindId k : kinds) {
        const auto& spec = schema_.kind(k).attributes[*schema_.kind(k).slot(a.name)];
        numeric = numeric || spec.type == AttrType::numeric || spec.type == AttrType::timestamp;
      }
      if (!numeric) unknown("attribute '" + a.name + "' is not numeric");
    } else if (name == "rel") {
      a.form = AtomForm::rel;
      a.subject = variable();
      expect(Tok::comma, "','");
      a.object = variable();
      expect(Tok::comma, "','");
      a.name = identifier("a relation name");
      if (!schema_.relation_id(a.name)) unknown("relation '" + a.name + "'");
      if (a.subject == a.object) throw Error(ErrorCode::syntax_error, "rel atom needs two distinct variables");
    } else if (name.size() > 5 && name.ends_with("_attr") && schema_.kind_id(name.substr(0, name.size() - 5))) {
      a.form = AtomForm::neighbor_attr;
      a.neighbor_kind = name.substr(0, name.size() - 5);
      a.subject = variable();
      expect(Tok::comma, "','");
      a.name = identifier("an attribute name");
      expect(Tok::comma, "','");
      a.value = std::string(word("a value"));
      const KindId k = *schema_.kind_id(a.neighbor_kind);
      if (!schema_.kind(k).slot(a.name)) unknown("attribute '" + a.name + "' of kind " + a.neighbor_kind);
      check_value(a.name, a.value, {k});
      if (a.subject != Var::x) throw Error(ErrorCode::syntax_error, "neighbor atoms must be rooted at x");
    } else if (schema_.kind_id(name)) {
      a.form = AtomForm::kind;
      a.name = name;
      a.subject = variable();
    } else {
      unknown("predicate '" + name + "'");
    }
    expect(Tok::rparen, "')'");
    return a;
  }

  void check_structure(const Clause& c) const {
    if (c.body.size() > kMaxBodyAtoms) {
      throw Error(ErrorCode::syntax_error, "clause body has " + std::to_string(c.body.size()) +
                                               " atoms; at most " + std::to_string(kMaxBodyAtoms) + " allowed");
    }
    if (c.head.form == AtomForm::neighbor_attr) {
      throw Error(ErrorCode::syntax_error, "existential (neighbor) atoms are not allowed in the head");
    }
    bool body_y = false;
    for (const auto& a : c.body) body_y = body_y || a.mentions(Var::y);
    if (c.head.mentions(Var::y) && !body_y) {
      throw Error(ErrorCode::syntax_error, "head variable y is not bound in the body");
    }
  }

  Lexer lexer_;
  const Schema& schema_;
  Token tok_{Tok::end, {}, 0};
};

}  // namespace

Clause parse_clause(std::string_view text, const Schema& schema) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::syntax_error, "empty clause");
  }
  return Parser(text, schema).clause();
}

std::vector<Clause> parse_clauses(std::string_view text, const Schema& schema) {
  std::vector<Clause> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        out.push_back(parse_clause(line, schema));
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

}  // namespace clinlogic
