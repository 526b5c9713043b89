#include "vsr/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

constexpr int kMaxStack = 64;

struct FunctionInfo {
  std::string_view name;
  Expression::Code code;
  int min_args;
  int max_args;  // -1: variadic
};

constexpr std::array<FunctionInfo, 8> kFunctions{{
    {"exp", Expression::Code::Exp, 1, 1},
    {"log", Expression::Code::Log, 1, 1},
    {"sqrt", Expression::Code::Sqrt, 1, 1},
    {"abs", Expression::Code::Abs, 1, 1},
    {"tanh", Expression::Code::Tanh, 1, 1},
    {"pow", Expression::Code::Pow, 2, 2},
    {"min", Expression::Code::Min, 2, -1},
    {"max", Expression::Code::Max, 2, -1},
}};

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  std::vector<Expression::Op> run() {
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character");
    return std::move(program_);
  }

 private:
  using Code = Expression::Code;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression '" + std::string(text_) + "': " + msg +
                     " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void emit(Code code, double value = 0.0, int arg = 0) {
    program_.push_back({code, value, arg});
  }

  void parse_sum() {
    parse_product();
    for (;;) {
      if (accept('+')) {
        parse_product();
        emit(Code::Add);
      } else if (accept('-')) {
        parse_product();
        emit(Code::Sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    for (;;) {
      if (accept('*')) {
        parse_unary();
        emit(Code::Mul);
      } else if (accept('/')) {
        parse_unary();
        emit(Code::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      emit(Code::Neg);
      return;
    }
    if (accept('+')) {
      parse_unary();
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_primary();
    if (accept('^')) {
      parse_unary();  // right associative, allows 2^-1
      emit(Code::Pow);
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_sum();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      parse_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      parse_identifier();
      return;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  void parse_number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("bad number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    emit(Code::Const, v);
  }

  void parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const auto fn = std::find_if(kFunctions.begin(), kFunctions.end(),
                                   [&](const auto& f) { return f.name == name; });
      if (fn == kFunctions.end()) fail("unknown function '" + std::string(name) + "'");
      ++pos_;
      int args = 0;
      do {
        parse_sum();
        ++args;
        // Variadic min/max fold pairwise so the stack stays shallow.
        if (fn->max_args == -1 && args >= 2) emit(fn->code, 0.0, 2);
      } while (accept(','));
      expect(')');
      if (args < fn->min_args || (fn->max_args != -1 && args > fn->max_args))
        fail("wrong number of arguments to '" + std::string(name) + "'");
      if (fn->max_args != -1) emit(fn->code);
      return;
    }

    if (name == "pi") {
      emit(Code::Const, std::numbers::pi);
      return;
    }
    const auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) fail("unknown variable '" + std::string(name) + "'");
    emit(Code::Var, 0.0, static_cast<int>(it - vars_.begin()));
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
  std::vector<Expression::Op> program_;
};

Expression Expression::parse(std::string_view text,
                             std::vector<std::string> variables) {
  Expression e;
  e.text_ = std::string(text);
  e.variables_ = std::move(variables);
  e.program_ = ExpressionParser(e.text_, e.variables_).run();

  int depth = 0;
  for (const Op& op : e.program_) {
    switch (op.code) {
      case Code::Const:
      case Code::Var:
        ++depth;
        break;
      case Code::Neg:
      case Code::Exp:
      case Code::Log:
      case Code::Sqrt:
      case Code::Abs:
      case Code::Tanh:
        break;
      default:
        --depth;
        break;
    }
    e.max_depth_ = std::max(e.max_depth_, depth);
  }
  if (e.max_depth_ > kMaxStack)
    throw ParseError("expression '" + e.text_ + "' nests too deeply");
  return e;
}

double Expression::eval(std::span<const double> values) const {
  std::array<double, kMaxStack> stack;
  int top = -1;
  for (const Op& op : program_) {
    switch (op.code) {
      case Code::Const:
        stack[++top] = op.value;
        break;
      case Code::Var:
        stack[++top] = values[static_cast<std::size_t>(op.arg)];
        break;
      case Code::Add:
        stack[top - 1] += stack[top];
        --top;
        break;
      case Code::Sub:
        stack[top - 1] -= stack[top];
        --top;
        break;
      case Code::Mul:
        stack[top - 1] *= stack[top];
        --top;
        break;
      case Code::Div:
        stack[top - 1] /= stack[top];
        --top;
        break;
      case Code::Pow:
        stack[top - 1] = std::pow(stack[top - 1], stack[top]);
        --top;
        break;
      case Code::Min:
        stack[top - 1] = std::fmin(stack[top - 1], stack[top]);
        --top;
        break;
      case Code::Max:
        stack[top - 1] = std::fmax(stack[top - 1], stack[top]);
        --top;
        break;
      case Code::Neg:
        stack[top] = -stack[top];
        break;
      case Code::Exp:
        stack[top] = std::exp(stack[top]);
        break;
      case Code::Log:
        stack[top] = std::log(stack[top]);
        break;
      case Code::Sqrt:
        stack[top] = std::sqrt(stack[top]);
        break;
      case Code::Abs:
        stack[top] = std::fabs(stack[top]);
        break;
      case Code::Tanh:
        stack[top] = std::tanh(stack[top]);
        break;
    }
  }
  return top == 0 ? stack[0] : std::nan("");
}

bool Expression::uses(std::size_t variable) const {
  return std::any_of(program_.begin(), program_.end(), [&](const Op& op) {
    return op.code == Code::Var && static_cast<std::size_t>(op.arg) == variable;
  });
}

std::optional<Expression::Monomial> Expression::as_monomial() const {
  // Abstract interpretation over {constant, c*v^p, anything else}.
  struct Term {
    enum Kind { Constant, Mono, Other } kind;
    double coef = 0.0;
    std::size_t var = 0;
    double exponent = 0.0;
  };
  std::vector<Term> st;
  auto other = [] { return Term{Term::Other}; };

  for (const Op& op : program_) {
    if (op.code == Code::Const) {
      st.push_back({Term::Constant, op.value});
      continue;
    }
    if (op.code == Code::Var) {
      st.push_back({Term::Mono, 1.0, static_cast<std::size_t>(op.arg), 1.0});
      continue;
    }
    if (op.code == Code::Neg) {
      if (st.back().kind != Term::Other) st.back().coef = -st.back().coef;
      continue;
    }
    if (op.code == Code::Exp || op.code == Code::Log || op.code == Code::Sqrt ||
        op.code == Code::Abs || op.code == Code::Tanh) {
      Term& a = st.back();
      if (a.kind == Term::Constant) {
        std::array<double, 1> none{};
        Expression tmp;
        tmp.program_ = {{Code::Const, a.coef, 0}, op};
        a.coef = tmp.eval(none);
      } else if (op.code == Code::Sqrt && a.kind == Term::Mono && a.coef > 0) {
        a.coef = std::sqrt(a.coef);
        a.exponent *= 0.5;
      } else {
        a = other();
      }
      continue;
    }
    const Term b = st.back();
    st.pop_back();
    Term& a = st.back();
    if (a.kind == Term::Other || b.kind == Term::Other) {
      a = other();
      continue;
    }
    const bool ac = a.kind == Term::Constant;
    const bool bc = b.kind == Term::Constant;
    switch (op.code) {
      case Code::Add:
      case Code::Sub:
        if (ac && bc)
          a.coef = op.code == Code::Add ? a.coef + b.coef : a.coef - b.coef;
        else
          a = other();
        break;
      case Code::Mul:
        if (ac && !bc) {
          a = Term{Term::Mono, a.coef * b.coef, b.var, b.exponent};
        } else if (!ac && !bc) {
          if (a.var != b.var) {
            a = other();
          } else {
            a.coef *= b.coef;
            a.exponent += b.exponent;
          }
        } else {
          a.coef *= b.coef;
        }
        break;
      case Code::Div:
        if (bc)
          a.coef /= b.coef;
        else
          a = other();
        break;
      case Code::Pow:
        if (ac && bc)
          a.coef = std::pow(a.coef, b.coef);
        else if (!ac && bc && a.coef > 0) {
          a.coef = std::pow(a.coef, b.coef);
          a.exponent *= b.coef;
        } else
          a = other();
        break;
      default:
        a = other();
        break;
    }
  }
  if (st.size() != 1 || st[0].kind != Term::Mono) return std::nullopt;
  return Monomial{st[0].var, st[0].coef, st[0].exponent};
}

}  // namespace vsr
