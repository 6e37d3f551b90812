#include "nh/expression.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "nh/errors.hpp"

namespace nh {

struct Expression::Node {
  enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };
  Kind kind;
  double value = 0.0; // Const
  int var = 0;        // Var: 0..2 -> x1..x3, 3 -> t, 4 -> theta
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Const;
  n->value = v;
  return n;
}

class Parser {
public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at position " +
                      std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (consume('+')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Add;
        n->a = lhs;
        n->b = term();
        lhs = n;
      } else if (consume('-')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Sub;
        n->a = lhs;
        n->b = term();
        lhs = n;
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (consume('*')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Mul;
        n->a = lhs;
        n->b = factor();
        lhs = n;
      } else if (consume('/')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Div;
        n->a = lhs;
        n->b = factor();
        lhs = n;
      } else {
        return lhs;
      }
    }
  }

  // Right-associative power binds tighter than unary minus on the left
  // operand side: -x^2 parses as -(x^2).
  NodePtr factor() {
    if (consume('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Neg;
      n->a = factor();
      return n;
    }
    NodePtr base = primary();
    if (consume('^')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Pow;
      n->a = base;
      n->b = factor();
      return n;
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    fail("unexpected character");
  }

  NodePtr number() {
    size_t end = 0;
    double v = 0.0;
    try {
      v = std::stod(s_.substr(pos_), &end);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += end;
    return make_const(v);
  }

  NodePtr ident() {
    const size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);

    static const struct { const char* name; int var; } vars[] = {
        {"x1", 0}, {"x2", 1}, {"x3", 2}, {"t", 3}, {"theta", 4}};
    for (const auto& v : vars)
      if (name == v.name) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Var;
        n->var = v.var;
        return n;
      }
    if (name == "pi") return make_const(M_PI);

    Node::Kind fn;
    if (name == "sin") fn = Node::Kind::Sin;
    else if (name == "cos") fn = Node::Kind::Cos;
    else if (name == "exp") fn = Node::Kind::Exp;
    else if (name == "sqrt") fn = Node::Kind::Sqrt;
    else fail("unknown identifier '" + name + "'");

    if (!consume('(')) fail("expected '(' after function name");
    NodePtr arg = expr();
    if (!consume(')')) fail("missing ')' after function argument");
    auto n = std::make_shared<Node>();
    n->kind = fn;
    n->a = arg;
    return n;
  }
};

double eval_node(const Node& n, const double* vars) {
  switch (n.kind) {
    case Node::Kind::Const: return n.value;
    case Node::Kind::Var: return vars[n.var];
    case Node::Kind::Neg: return -eval_node(*n.a, vars);
    case Node::Kind::Add: return eval_node(*n.a, vars) + eval_node(*n.b, vars);
    case Node::Kind::Sub: return eval_node(*n.a, vars) - eval_node(*n.b, vars);
    case Node::Kind::Mul: return eval_node(*n.a, vars) * eval_node(*n.b, vars);
    case Node::Kind::Div: return eval_node(*n.a, vars) / eval_node(*n.b, vars);
    case Node::Kind::Pow: return std::pow(eval_node(*n.a, vars), eval_node(*n.b, vars));
    case Node::Kind::Sin: return std::sin(eval_node(*n.a, vars));
    case Node::Kind::Cos: return std::cos(eval_node(*n.a, vars));
    case Node::Kind::Exp: return std::exp(eval_node(*n.a, vars));
    case Node::Kind::Sqrt: return std::sqrt(eval_node(*n.a, vars));
  }
  return 0.0;
}

} // namespace

Expression::Expression() : root_(make_const(0.0)), text_("0") {}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).run();
  e.text_ = text;
  return e;
}

double Expression::eval(double x1, double x2, double x3, double t,
                        double theta) const {
  const double vars[5] = {x1, x2, x3, t, theta};
  return eval_node(*root_, vars);
}

} // namespace nh
