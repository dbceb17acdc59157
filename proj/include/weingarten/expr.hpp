// Expression DSL for curvature relations g(k).
//
// Grammar (whitespace-insensitive):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          right-associative
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Unary minus binds looser than '^', so "-k^2" is -(k^2). The only free
// variable is `k`; every other bare identifier is a named parameter bound
// at evaluation time. Functions: exp, log, tanh, sqrt, abs.
#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "weingarten/dual.hpp"
#include "weingarten/errors.hpp"

namespace weingarten::expr {

enum class Kind { Number, Variable, Param, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func { Exp, Log, Tanh, Sqrt, Abs };

using Params = std::map<std::string, double, std::less<>>;

/// Immutable, shareable AST node handle.
class Expr {
 public:
  struct Node {
    Kind kind;
    double number = 0.0;
    std::string name;  // parameter name
    Func func = Func::Exp;
    std::shared_ptr<const Node> lhs, rhs;
  };

  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Expr number(double v) { return make({Kind::Number, v, {}, Func::Exp, nullptr, nullptr}); }
  static Expr variable() { return make({Kind::Variable, 0.0, {}, Func::Exp, nullptr, nullptr}); }
  static Expr param(std::string name) {
    return make({Kind::Param, 0.0, std::move(name), Func::Exp, nullptr, nullptr});
  }
  static Expr binary(Kind k, const Expr& a, const Expr& b) {
    return make({k, 0.0, {}, Func::Exp, a.node_, b.node_});
  }
  static Expr neg(const Expr& a) { return make({Kind::Neg, 0.0, {}, Func::Exp, a.node_, nullptr}); }
  static Expr call(Func f, const Expr& a) { return make({Kind::Call, 0.0, {}, f, a.node_, nullptr}); }

  bool empty() const { return !node_; }
  Kind kind() const { return node_->kind; }
  double value() const { return node_->number; }
  const std::string& name() const { return node_->name; }
  Func func() const { return node_->func; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  friend bool operator==(const Expr& a, const Expr& b) { return equal(a.node_.get(), b.node_.get()); }

 private:
  static Expr make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
      case Kind::Number:
        return a->number == b->number;
      case Kind::Variable:
        return true;
      case Kind::Param:
        return a->name == b->name;
      case Kind::Neg:
        return equal(a->lhs.get(), b->lhs.get());
      case Kind::Call:
        return a->func == b->func && equal(a->lhs.get(), b->lhs.get());
      default:
        return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
    }
  }

  std::shared_ptr<const Node> node_;
};

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Tanh: return "tanh";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) {
      fail({"+", "-", "*", "/", "^", "end of input"}, "unexpected '" + std::string(1, src_[pos_]) + "'");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what) const {
    throw ParseError(pos_, std::move(expected), what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Kind::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Kind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Kind::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Kind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::neg(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return Expr::binary(Kind::Pow, base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail({"number", "identifier", "(", "-"}, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!accept(')')) fail({")"}, "expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail({"number", "identifier", "(", "-"}, "unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      fail({"number"}, "malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = mark + 1;
        fail({"digit"}, "malformed exponent");
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    return Expr::number(std::strtod(text.c_str(), nullptr));
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      static const std::map<std::string, Func, std::less<>> funcs = {
          {"exp", Func::Exp}, {"log", Func::Log}, {"tanh", Func::Tanh},
          {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};
      const auto it = funcs.find(name);
      if (it == funcs.end()) {
        pos_ = start;
        fail({"exp", "log", "tanh", "sqrt", "abs"}, "unknown function '" + name + "'");
      }
      ++pos_;
      Expr arg = parse_expr();
      if (!accept(')')) fail({")"}, "expected ')'");
      return Expr::call(it->second, arg);
    }
    if (name == "k") return Expr::variable();
    return Expr::param(name);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Parses `source`; throws ParseError with the byte offset on failure.
inline Expr parse(std::string_view source) { return detail::Parser(source).parse_all(); }

/// Fully parenthesized canonical text; parse(print(e)) == e for parsed trees.
inline std::string print(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number: return detail::format_number(e.value());
    case Kind::Variable: return "k";
    case Kind::Param: return e.name();
    case Kind::Neg: return "(-" + print(e.lhs()) + ")";
    case Kind::Call: return std::string(func_name(e.func())) + "(" + print(e.lhs()) + ")";
    default: break;
  }
  const char* op = e.kind() == Kind::Add ? " + "
                   : e.kind() == Kind::Sub ? " - "
                   : e.kind() == Kind::Mul ? " * "
                   : e.kind() == Kind::Div ? " / "
                                           : " ^ ";
  return "(" + print(e.lhs()) + op + print(e.rhs()) + ")";
}

/// Replaces every bound parameter by its numeric value. Throws EvalError
/// for unbound names so that failures surface before any evaluation.
inline Expr bind(const Expr& e, const Params& params) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Variable:
      return e;
    case Kind::Param: {
      const auto it = params.find(e.name());
      if (it == params.end()) throw EvalError("unbound parameter '" + e.name() + "'");
      return Expr::number(it->second);
    }
    case Kind::Neg: return Expr::neg(expr::bind(e.lhs(), params));
    case Kind::Call: return Expr::call(e.func(), expr::bind(e.lhs(), params));
    default: return Expr::binary(e.kind(), expr::bind(e.lhs(), params), expr::bind(e.rhs(), params));
  }
}

namespace detail {

inline Dual checked(Dual d, const char* what) {
  if (!std::isfinite(d.value) || !std::isfinite(d.deriv)) {
    throw EvalError(std::string("non-finite result in ") + what);
  }
  return d;
}

inline Dual eval(const Expr& e, Dual k, const Params* params) {
  switch (e.kind()) {
    case Kind::Number: return Dual::constant(e.value());
    case Kind::Variable: return k;
    case Kind::Param: {
      if (params) {
        const auto it = params->find(e.name());
        if (it != params->end()) return Dual::constant(it->second);
      }
      throw EvalError("unbound parameter '" + e.name() + "'");
    }
    case Kind::Neg: return -eval(e.lhs(), k, params);
    case Kind::Add: return eval(e.lhs(), k, params) + eval(e.rhs(), k, params);
    case Kind::Sub: return eval(e.lhs(), k, params) - eval(e.rhs(), k, params);
    case Kind::Mul: return checked(eval(e.lhs(), k, params) * eval(e.rhs(), k, params), "*");
    case Kind::Div: {
      const Dual a = eval(e.lhs(), k, params);
      const Dual b = eval(e.rhs(), k, params);
      if (b.value == 0.0) throw EvalError("division by zero");
      return checked(a / b, "/");
    }
    case Kind::Pow: {
      const Dual a = eval(e.lhs(), k, params);
      const Dual b = eval(e.rhs(), k, params);
      if (a.value == 0.0 && b.value < 0.0) throw EvalError("zero raised to a negative power");
      if (a.value < 0.0 && (b.deriv != 0.0 || b.value != std::trunc(b.value))) {
        throw EvalError("negative base with non-integer exponent");
      }
      if (a.value == 0.0 && b.deriv != 0.0) throw EvalError("zero base with varying exponent");
      return checked(pow(a, b), "^");
    }
    case Kind::Call: {
      const Dual a = eval(e.lhs(), k, params);
      switch (e.func()) {
        case Func::Exp: return checked(exp(a), "exp");
        case Func::Log:
          if (a.value <= 0.0) throw EvalError("log of non-positive argument");
          return checked(log(a), "log");
        case Func::Tanh: return tanh(a);
        case Func::Sqrt:
          if (a.value <= 0.0) {
            if (a.value < 0.0 || a.deriv != 0.0) throw EvalError("sqrt outside its differentiable domain");
            return Dual::constant(0.0);
          }
          return checked(sqrt(a), "sqrt");
        case Func::Abs:
          if (a.value == 0.0 && a.deriv != 0.0) throw EvalError("abs is not differentiable at 0");
          return abs(a);
      }
    }
  }
  throw EvalError("corrupt expression");
}

}  // namespace detail

/// Value and exact first derivative with respect to k.
inline Dual eval_dual(const Expr& e, Dual k, const Params& params = {}) {
  return detail::eval(e, k, &params);
}
inline Dual eval_dual(const Expr& e, double k, const Params& params = {}) {
  return detail::eval(e, Dual::variable(k), &params);
}

/// Binds parameters once and returns a callable k -> (g, g').
inline std::function<Dual(Dual)> compile(const Expr& e, const Params& params = {}) {
  Expr bound = bind(e, params);
  return [bound](Dual k) { return detail::eval(bound, k, nullptr); };
}

}  // namespace weingarten::expr
