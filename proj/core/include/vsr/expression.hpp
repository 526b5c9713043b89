#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsr {

/// A compiled arithmetic expression over named real variables.
///
/// Syntax: numbers, declared variable names, `pi`, the binary operators
/// `+ - * / ^` (`^` is right associative and binds tighter than unary minus),
/// parentheses and the functions `exp log sqrt abs tanh pow(a,b) min(a,...)
/// max(a,...)`. The text is compiled once into a postfix program; evaluation
/// is allocation-free and safe to call concurrently.
class Expression {
 public:
  /// Monomial view `coef * var^exponent` of a single variable.
  struct Monomial {
    std::size_t variable;
    double coef;
    double exponent;
  };

  Expression() = default;

  /// Throws ParseError on malformed text or undeclared identifiers.
  static Expression parse(std::string_view text,
                          std::vector<std::string> variables);

  double eval(std::span<const double> values) const;
  double operator()(std::span<const double> values) const {
    return eval(values);
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }
  bool uses(std::size_t variable) const;

  /// Non-empty when the program reduces to `c * v^p` (e.g. `3*pow(s,4)`,
  /// `s^2/2`, `s`); used to attach exact inverses.
  std::optional<Monomial> as_monomial() const;

  enum class Code : unsigned char {
    Const, Var, Add, Sub, Mul, Div, Pow, Neg,
    Exp, Log, Sqrt, Abs, Tanh, Min, Max
  };
  struct Op {
    Code code;
    double value = 0.0;  // Const
    int arg = 0;         // Var index, or arity for Min/Max
  };

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::vector<Op> program_;
  int max_depth_ = 0;

  friend class ExpressionParser;
};

}  // namespace vsr
