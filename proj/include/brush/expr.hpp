// Closed-form scalar fields f(x,y): tiny expression trees with evaluation,
// symbolic differentiation and a text parser. Used for source terms and
// manufactured solutions so that quadrature sees the true function, never a
// nodal interpolant.
#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace brush {

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

enum class Op {
  Const,
  VarX,
  VarY,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,  // integer exponent >= 0
  Sin,
  Cos,
  Sinh,
  Cosh,
  Exp,
  Sqrt,
};

struct ExprNode {
  Op op = Op::Const;
  double value = 0.0;
  int ipow = 0;
  std::shared_ptr<const ExprNode> a, b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

inline NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

inline bool is_const(const NodePtr& n, double v) {
  return n->op == Op::Const && n->value == v;
}

inline double eval(const ExprNode& n, double x, double y) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::Add: return eval(*n.a, x, y) + eval(*n.b, x, y);
    case Op::Sub: return eval(*n.a, x, y) - eval(*n.b, x, y);
    case Op::Mul: return eval(*n.a, x, y) * eval(*n.b, x, y);
    case Op::Div: return eval(*n.a, x, y) / eval(*n.b, x, y);
    case Op::Neg: return -eval(*n.a, x, y);
    case Op::Pow: {
      double base = eval(*n.a, x, y);
      double r = 1.0;
      for (int k = 0; k < n.ipow; ++k) r *= base;
      return r;
    }
    case Op::Sin: return std::sin(eval(*n.a, x, y));
    case Op::Cos: return std::cos(eval(*n.a, x, y));
    case Op::Sinh: return std::sinh(eval(*n.a, x, y));
    case Op::Cosh: return std::cosh(eval(*n.a, x, y));
    case Op::Exp: return std::exp(eval(*n.a, x, y));
    case Op::Sqrt: return std::sqrt(eval(*n.a, x, y));
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, bool wrt_x);

inline NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const)
    return make_const(a->value + b->value);
  return make(Op::Add, std::move(a), std::move(b));
}

inline NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const)
    return make_const(a->value * b->value);
  return make(Op::Mul, std::move(a), std::move(b));
}

inline NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const)
    return make_const(a->value - b->value);
  return make(Op::Sub, std::move(a), std::move(b));
}

inline NodePtr neg(NodePtr a) {
  if (a->op == Op::Const) return make_const(-a->value);
  return make(Op::Neg, std::move(a));
}

inline NodePtr diff(const NodePtr& n, bool wrt_x) {
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::VarX: return make_const(wrt_x ? 1.0 : 0.0);
    case Op::VarY: return make_const(wrt_x ? 0.0 : 1.0);
    case Op::Add: return add(diff(n->a, wrt_x), diff(n->b, wrt_x));
    case Op::Sub: return sub(diff(n->a, wrt_x), diff(n->b, wrt_x));
    case Op::Mul:
      return add(mul(diff(n->a, wrt_x), n->b), mul(n->a, diff(n->b, wrt_x)));
    case Op::Div: {
      NodePtr num =
          sub(mul(diff(n->a, wrt_x), n->b), mul(n->a, diff(n->b, wrt_x)));
      NodePtr den = make(Op::Mul, n->b, n->b);
      return make(Op::Div, std::move(num), std::move(den));
    }
    case Op::Neg: return neg(diff(n->a, wrt_x));
    case Op::Pow: {
      if (n->ipow == 0) return make_const(0.0);
      auto down = make(Op::Pow, n->a);
      const_cast<ExprNode&>(*down).ipow = n->ipow - 1;
      return mul(make_const(double(n->ipow)),
                 mul(std::move(down), diff(n->a, wrt_x)));
    }
    case Op::Sin: return mul(make(Op::Cos, n->a), diff(n->a, wrt_x));
    case Op::Cos: return neg(mul(make(Op::Sin, n->a), diff(n->a, wrt_x)));
    case Op::Sinh: return mul(make(Op::Cosh, n->a), diff(n->a, wrt_x));
    case Op::Cosh: return mul(make(Op::Sinh, n->a), diff(n->a, wrt_x));
    case Op::Exp: return mul(make(Op::Exp, n->a), diff(n->a, wrt_x));
    case Op::Sqrt: {
      NodePtr two_sqrt = mul(make_const(2.0), make(Op::Sqrt, n->a));
      return make(Op::Div, diff(n->a, wrt_x), std::move(two_sqrt));
    }
  }
  return make_const(0.0);
}

}  // namespace detail

// Immutable expression in the variables x and y. Copy is cheap.
class Expr {
 public:
  Expr() : node_(detail::make_const(0.0)) {}
  Expr(double v) : node_(detail::make_const(v)) {}  // NOLINT(implicit)

  static Expr x() { return Expr(detail::make(detail::Op::VarX)); }
  static Expr y() { return Expr(detail::make(detail::Op::VarY)); }

  double operator()(double px, double py) const {
    return detail::eval(*node_, px, py);
  }

  Expr dx() const { return Expr(detail::diff(node_, true)); }
  Expr dy() const { return Expr(detail::diff(node_, false)); }

  friend Expr operator+(const Expr& a, const Expr& b) {
    return Expr(detail::add(a.node_, b.node_));
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return Expr(detail::sub(a.node_, b.node_));
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    return Expr(detail::mul(a.node_, b.node_));
  }
  friend Expr operator/(const Expr& a, const Expr& b) {
    return Expr(detail::make(detail::Op::Div, a.node_, b.node_));
  }
  friend Expr operator-(const Expr& a) { return Expr(detail::neg(a.node_)); }

  Expr pow(int k) const {
    if (k < 0) throw ExprError("negative exponents not supported");
    auto n = detail::make(detail::Op::Pow, node_);
    const_cast<detail::ExprNode&>(*n).ipow = k;
    return Expr(n);
  }

  friend Expr sin(const Expr& a) {
    return Expr(detail::make(detail::Op::Sin, a.node_));
  }
  friend Expr cos(const Expr& a) {
    return Expr(detail::make(detail::Op::Cos, a.node_));
  }
  friend Expr sinh(const Expr& a) {
    return Expr(detail::make(detail::Op::Sinh, a.node_));
  }
  friend Expr cosh(const Expr& a) {
    return Expr(detail::make(detail::Op::Cosh, a.node_));
  }
  friend Expr exp(const Expr& a) {
    return Expr(detail::make(detail::Op::Exp, a.node_));
  }
  friend Expr sqrt(const Expr& a) {
    return Expr(detail::make(detail::Op::Sqrt, a.node_));
  }

  // Grammar: expr := term (('+'|'-') term)*, term := factor (('*'|'/') factor)*,
  // factor := unary ('^' uint)?, primary := number | x | y | fn '(' expr ')'
  // | '(' expr ')'.
  static Expr parse(std::string_view text);

 private:
  explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}
  detail::NodePtr node_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size())
      throw ExprError("unexpected trailing input in expression: '" +
                      std::string(s_.substr(pos_)) + "'");
    return e;
  }

 private:
  std::string_view s_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+'))
        e = add(e, term());
      else if (eat('-'))
        e = sub(e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (eat('*'))
        e = mul(e, factor());
      else if (eat('/'))
        e = make(Op::Div, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (eat('^')) {
      skip_ws();
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
      if (pos_ == start) throw ExprError("expected integer exponent after '^'");
      auto n = make(Op::Pow, base);
      const_cast<ExprNode&>(*n).ipow =
          std::stoi(std::string(s_.substr(start, pos_ - start)));
      return n;
    }
    return base;
  }

  NodePtr unary() {
    if (eat('-')) return neg(unary());
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ExprError("unexpected end of expression");
    char c = s_[pos_];
    if (std::isdigit((unsigned char)c) || c == '.') {
      size_t used = 0;
      double v = std::stod(std::string(s_.substr(pos_)), &used);
      pos_ += used;
      return make_const(v);
    }
    if (std::isalpha((unsigned char)c)) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha((unsigned char)s_[pos_])) ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      if (name == "x") return make(Op::VarX);
      if (name == "y") return make(Op::VarY);
      Op op;
      if (name == "sin")
        op = Op::Sin;
      else if (name == "cos")
        op = Op::Cos;
      else if (name == "sinh")
        op = Op::Sinh;
      else if (name == "cosh")
        op = Op::Cosh;
      else if (name == "exp")
        op = Op::Exp;
      else if (name == "sqrt")
        op = Op::Sqrt;
      else
        throw ExprError("unknown function '" + name + "'");
      if (!eat('(')) throw ExprError("expected '(' after '" + name + "'");
      NodePtr arg = expr();
      if (!eat(')')) throw ExprError("expected ')' closing '" + name + "'");
      return make(op, arg);
    }
    if (eat('(')) {
      NodePtr e = expr();
      if (!eat(')')) throw ExprError("expected ')'");
      return e;
    }
    throw ExprError(std::string("unexpected character '") + c +
                    "' in expression");
  }
};

}  // namespace detail

inline Expr Expr::parse(std::string_view text) {
  return Expr(detail::Parser(text).parse());
}

}  // namespace brush
