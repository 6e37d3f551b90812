#pragma once

#include <memory>
#include <string>

namespace nh {

/// Small arithmetic expressions over (x1, x2, x3, t, theta) with +, -, *, /,
/// ^, parentheses, numeric literals, the constant pi and the function
/// whitelist sin, cos, exp, sqrt. Parsed once, evaluated many times.
class Expression {
public:
  Expression(); // constant zero
  static Expression parse(const std::string& text); // throws ConfigError

  double eval(double x1, double x2, double x3, double t, double theta = 0.0) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

} // namespace nh
