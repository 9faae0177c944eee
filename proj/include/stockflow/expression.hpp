// SPDX-License-Identifier: Apache-2.0
//
// Arithmetic expressions for auxiliary variables.
//
//   expr    ::= term { ("+" | "-") term }
//   term    ::= unary { ("*" | "/") unary }
//   unary   ::= "-" unary | power
//   power   ::= primary [ "^" unary ]          (right associative)
//   primary ::= number | identifier | "(" expr ")"
//
// Identifiers are [A-Za-z_][A-Za-z0-9_]*; bytes >= 0x80 are also accepted so
// that UTF-8 parameter names such as β or μ can be written directly.
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "stockflow/error.hpp"

namespace stockflow {

/// Time symbol available to every expression.
inline constexpr std::string_view kTimeSymbol = "t";

class Expression {
 public:
  enum class Kind { Literal, Identifier, Negate, Add, Subtract, Multiply, Divide, Power };

  static Expression literal(double v) { return Expression(std::make_shared<Node>(Node{Kind::Literal, v, {}, {}, {}})); }
  static Expression identifier(std::string name) {
    if (name.empty()) throw ValidationError("empty identifier");
    return Expression(std::make_shared<Node>(Node{Kind::Identifier, 0.0, std::move(name), {}, {}}));
  }
  static Expression negate(Expression e) {
    return Expression(std::make_shared<Node>(Node{Kind::Negate, 0.0, {}, std::move(e.node_), {}}));
  }
  static Expression binary(Kind k, Expression l, Expression r) {
    return Expression(std::make_shared<Node>(Node{k, 0.0, {}, std::move(l.node_), std::move(r.node_)}));
  }

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  Expression lhs() const { return Expression(node_->lhs); }
  Expression rhs() const { return Expression(node_->rhs); }

  bool is_binary() const { return kind() >= Kind::Add; }

  /// Number of binary operator nodes in the tree.
  std::size_t operator_count() const {
    switch (kind()) {
      case Kind::Literal:
      case Kind::Identifier: return 0;
      case Kind::Negate: return lhs().operator_count();
      default: return 1 + lhs().operator_count() + rhs().operator_count();
    }
  }

  /// Distinct identifiers, sorted.
  std::set<std::string> identifiers() const {
    std::set<std::string> out;
    collect(*node_, out);
    return out;
  }

  /// Copy with identifiers replaced according to `renames`.
  Expression rename(const std::map<std::string, std::string>& renames) const {
    switch (kind()) {
      case Kind::Literal: return *this;
      case Kind::Identifier: {
        auto it = renames.find(name());
        return it == renames.end() ? *this : identifier(it->second);
      }
      case Kind::Negate: return negate(lhs().rename(renames));
      default: return binary(kind(), lhs().rename(renames), rhs().rename(renames));
    }
  }

  /// Canonical text; parses back to a structurally equal tree.
  std::string to_string() const {
    std::string out;
    print(out);
    return out;
  }

  friend bool operator==(const Expression& a, const Expression& b) { return same(a.node_.get(), b.node_.get()); }

 private:
  struct Node {
    Kind kind;
    double value;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  explicit Expression(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool same(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
      case Kind::Literal: return a->value == b->value;
      case Kind::Identifier: return a->name == b->name;
      case Kind::Negate: return same(a->lhs.get(), b->lhs.get());
      default: return same(a->lhs.get(), b->lhs.get()) && same(a->rhs.get(), b->rhs.get());
    }
  }

  static void collect(const Node& n, std::set<std::string>& out) {
    if (n.kind == Kind::Identifier) out.insert(n.name);
    if (n.lhs) collect(*n.lhs, out);
    if (n.rhs) collect(*n.rhs, out);
  }

  static int precedence(Kind k) {
    switch (k) {
      case Kind::Add:
      case Kind::Subtract: return 1;
      case Kind::Multiply:
      case Kind::Divide: return 2;
      case Kind::Negate: return 3;
      case Kind::Power: return 4;
      default: return 5;
    }
  }

  static std::string format_number(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }

  void print_child(std::string& out, const Expression& child, bool parens) const {
    if (parens) out.push_back('(');
    child.print(out);
    if (parens) out.push_back(')');
  }

  void print(std::string& out) const {
    switch (kind()) {
      case Kind::Literal:
        if (std::signbit(value())) {
          out += "(" + format_number(value()) + ")";
        } else {
          out += format_number(value());
        }
        return;
      case Kind::Identifier: out += name(); return;
      case Kind::Negate:
        out.push_back('-');
        print_child(out, lhs(), precedence(lhs().kind()) < 3);
        return;
      default: break;
    }
    int p = precedence(kind());
    Expression l = lhs(), r = rhs();
    bool lp = kind() == Kind::Power ? precedence(l.kind()) <= p : precedence(l.kind()) < p;
    bool rp = kind() == Kind::Power ? precedence(r.kind()) < 3 : precedence(r.kind()) <= p;
    print_child(out, l, lp);
    switch (kind()) {
      case Kind::Add: out += " + "; break;
      case Kind::Subtract: out += " - "; break;
      case Kind::Multiply: out += "*"; break;
      case Kind::Divide: out += "/"; break;
      default: out += "^"; break;
    }
    print_child(out, r, rp);
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression parse() {
    Expression e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
  static bool ident_char(unsigned char c) { return ident_start(c) || std::isdigit(c); }

  Expression expr() {
    Expression e = term();
    for (;;) {
      if (accept('+')) e = Expression::binary(Expression::Kind::Add, e, term());
      else if (accept('-')) e = Expression::binary(Expression::Kind::Subtract, e, term());
      else return e;
    }
  }

  Expression term() {
    Expression e = unary();
    for (;;) {
      if (accept('*')) e = Expression::binary(Expression::Kind::Multiply, e, unary());
      else if (accept('/')) e = Expression::binary(Expression::Kind::Divide, e, unary());
      else return e;
    }
  }

  Expression unary() {
    if (accept('-')) return Expression::negate(unary());
    return power();
  }

  Expression power() {
    Expression base = primary();
    if (accept('^')) return Expression::binary(Expression::Kind::Power, base, unary());
    return base;
  }

  Expression primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    unsigned char c = static_cast<unsigned char>(text_[pos_]);
    if (c == '(') {
      ++pos_;
      Expression e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(c) || c == '.') return number();
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return Expression::identifier(std::string(text_.substr(start, pos_ - start)));
    }
    fail("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

  Expression number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t mant = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mant += digits();
    }
    if (mant == 0) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0.0;
    auto r = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (r.ec != std::errc() || r.ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expression::literal(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text) { return detail::ExpressionParser(text).parse(); }

/// Name -> value bindings for evaluation. The time symbol is bound via `t`.
struct Bindings {
  std::map<std::string, double, std::less<>> values;
  double t = 0.0;
};

inline double eval_expression(const Expression& e, const Bindings& env) {
  using K = Expression::Kind;
  switch (e.kind()) {
    case K::Literal: return e.value();
    case K::Identifier: {
      if (e.name() == kTimeSymbol) return env.t;
      auto it = env.values.find(e.name());
      if (it == env.values.end()) throw RuntimeFailure("unbound identifier '" + e.name() + "'");
      return it->second;
    }
    case K::Negate: return -eval_expression(e.lhs(), env);
    default: break;
  }
  double a = eval_expression(e.lhs(), env);
  double b = eval_expression(e.rhs(), env);
  switch (e.kind()) {
    case K::Add: return a + b;
    case K::Subtract: return a - b;
    case K::Multiply: return a * b;
    case K::Divide:
      if (b == 0.0) {
        Expression d = e.rhs();
        throw RuntimeFailure(d.kind() == K::Identifier ? "division by zero: '" + d.name() + "' is 0"
                                                       : "division by zero in '" + e.to_string() + "'");
      }
      return a / b;
    default: return std::pow(a, b);
  }
}

/// An expression compiled against a fixed slot layout: postfix code whose
/// identifiers are indices into a flat value array. Used on the hot path of
/// the vectorfield.
class CompiledExpression {
 public:
  /// `slot_of` returns the slot for a name or -1 if it is unbound.
  template <typename SlotOf>
  CompiledExpression(const Expression& e, SlotOf&& slot_of) : text_(e.to_string()) {
    emit(e, slot_of);
  }

  /// `slots` holds every bound value; `t` is the time.
  double operator()(const std::vector<double>& slots, double t) const {
    double stack[64] = {};
    std::size_t sp = 0;
    std::vector<double> big;
    double* st = stack;
    if (depth_ > 64) {
      big.resize(depth_);
      st = big.data();
    }
    for (const Op& op : code_) {
      switch (op.code) {
        case Code::Const: st[sp++] = op.value; break;
        case Code::Load: st[sp++] = slots[op.slot]; break;
        case Code::Time: st[sp++] = t; break;
        case Code::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Code::Add: --sp; st[sp - 1] += st[sp]; break;
        case Code::Sub: --sp; st[sp - 1] -= st[sp]; break;
        case Code::Mul: --sp; st[sp - 1] *= st[sp]; break;
        case Code::Div:
          --sp;
          if (st[sp] == 0.0)
            throw RuntimeFailure(op.divisor.empty() ? "division by zero in '" + text_ + "'"
                                                    : "division by zero: '" + op.divisor + "' is 0");
          st[sp - 1] /= st[sp];
          break;
        case Code::Pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
      }
    }
    return st[0];
  }

  const std::string& text() const { return text_; }

 private:
  enum class Code { Const, Load, Time, Neg, Add, Sub, Mul, Div, Pow };
  struct Op {
    Op(Code c, double v = 0.0, std::size_t s = 0) : code(c), value(v), slot(s) {}
    Code code;
    double value;
    std::size_t slot;
    std::string divisor;
  };

  template <typename SlotOf>
  void emit(const Expression& e, SlotOf& slot_of) {
    using K = Expression::Kind;
    switch (e.kind()) {
      case K::Literal: push({Code::Const, e.value()}); return;
      case K::Identifier: {
        if (e.name() == kTimeSymbol) {
          push({Code::Time});
          return;
        }
        long s = slot_of(e.name());
        if (s >= 0) {
          push({Code::Load, 0.0, static_cast<std::size_t>(s)});
        } else {
          throw RuntimeFailure("unbound identifier '" + e.name() + "' in '" + text_ + "'");
        }
        return;
      }
      case K::Negate:
        emit(e.lhs(), slot_of);
        code_.push_back({Code::Neg});
        return;
      default: break;
    }
    emit(e.lhs(), slot_of);
    emit(e.rhs(), slot_of);
    Op op{Code::Add};
    switch (e.kind()) {
      case K::Add: op.code = Code::Add; break;
      case K::Subtract: op.code = Code::Sub; break;
      case K::Multiply: op.code = Code::Mul; break;
      case K::Divide:
        op.code = Code::Div;
        if (e.rhs().kind() == K::Identifier) op.divisor = e.rhs().name();
        break;
      default: op.code = Code::Pow; break;
    }
    code_.push_back(std::move(op));
    --cur_;
  }

  void push(Op op) {
    code_.push_back(std::move(op));
    depth_ = std::max(depth_, ++cur_);
  }

  std::string text_;
  std::vector<Op> code_;
  std::size_t cur_ = 0;
  std::size_t depth_ = 0;
};

}  // namespace stockflow
