#pragma once

// Small closed-form expression language used for sequences, weight
// functions and phi functions on the command line and in config files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'n' | 'x' | 'pi' | 'e' | ident '(' args ')' | '(' expr ')'
//
// 'n' and 'x' both name the single argument. Functions: sq, sqrt, abs, exp,
// log, sin, cos, tan, atan, floor, ceil, gamma, lgamma, fact (= n!), pow,
// min, max, binom.

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voronoi/error.hpp"

namespace voronoi {

/// A real function of one real variable with an optional closed-form inverse.
struct RealFunction {
  std::function<double(double)> fn;
  std::function<double(double)> inverse;
  std::string label;

  double operator()(double x) const { return fn(x); }
  [[nodiscard]] bool has_inverse() const { return static_cast<bool>(inverse); }
};

namespace detail {

using Node = std::function<double(double)>;

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Node parse() {
    Node node = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw parse_error("expression '" + std::string(text_) + "': " + what + " at offset " +
                      std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
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

  Node parse_expr() {
    Node lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        Node rhs = parse_term();
        lhs = [lhs, rhs](double x) { return lhs(x) + rhs(x); };
      } else if (accept('-')) {
        Node rhs = parse_term();
        lhs = [lhs, rhs](double x) { return lhs(x) - rhs(x); };
      } else {
        return lhs;
      }
    }
  }

  Node parse_term() {
    Node lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        Node rhs = parse_unary();
        lhs = [lhs, rhs](double x) { return lhs(x) * rhs(x); };
      } else if (accept('/')) {
        Node rhs = parse_unary();
        lhs = [lhs, rhs](double x) { return lhs(x) / rhs(x); };
      } else {
        return lhs;
      }
    }
  }

  Node parse_unary() {
    if (accept('-')) {
      Node arg = parse_unary();
      return [arg](double x) { return -arg(x); };
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Node parse_power() {
    Node base = parse_primary();
    if (accept('^')) {
      Node exponent = parse_unary();
      return [base, exponent](double x) { return std::pow(base(x), exponent(x)); };
    }
    return base;
  }

  Node parse_number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return [value](double) { return value; };
  }

  std::vector<Node> parse_args() {
    std::vector<Node> args;
    expect('(');
    if (accept(')')) return args;
    do {
      args.push_back(parse_expr());
    } while (accept(','));
    expect(')');
    return args;
  }

  Node call(const std::string& name, std::vector<Node> args) {
    auto unary = [&](double (*f)(double)) -> Node {
      if (args.size() != 1) fail(name + " takes one argument");
      Node a = args[0];
      return [a, f](double x) { return f(a(x)); };
    };
    auto binary = [&](double (*f)(double, double)) -> Node {
      if (args.size() != 2) fail(name + " takes two arguments");
      Node a = args[0];
      Node b = args[1];
      return [a, b, f](double x) { return f(a(x), b(x)); };
    };
    if (name == "sq") return unary([](double v) { return v * v; });
    if (name == "sqrt") return unary([](double v) { return std::sqrt(v); });
    if (name == "abs") return unary([](double v) { return std::fabs(v); });
    if (name == "exp") return unary([](double v) { return std::exp(v); });
    if (name == "log") return unary([](double v) { return std::log(v); });
    if (name == "sin") return unary([](double v) { return std::sin(v); });
    if (name == "cos") return unary([](double v) { return std::cos(v); });
    if (name == "tan") return unary([](double v) { return std::tan(v); });
    if (name == "atan") return unary([](double v) { return std::atan(v); });
    if (name == "floor") return unary([](double v) { return std::floor(v); });
    if (name == "ceil") return unary([](double v) { return std::ceil(v); });
    if (name == "gamma") return unary([](double v) { return std::tgamma(v); });
    if (name == "lgamma") return unary([](double v) { return std::lgamma(v); });
    if (name == "fact") return unary([](double v) { return std::tgamma(v + 1.0); });
    if (name == "pow") return binary([](double a, double b) { return std::pow(a, b); });
    if (name == "min") return binary([](double a, double b) { return std::fmin(a, b); });
    if (name == "max") return binary([](double a, double b) { return std::fmax(a, b); });
    if (name == "binom") {
      return binary([](double a, double b) {
        // Exact product for small integer b; lgamma otherwise.
        if (b == std::floor(b) && b >= 0.0 && b <= 64.0) {
          double r = 1.0;
          for (int i = 1; i <= static_cast<int>(b); ++i) r = r * (a - b + i) / i;
          return r;
        }
        return std::exp(std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0));
      });
    }
    fail("unknown function '" + name + "'");
  }

  Node parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Node inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(text_.substr(start, pos_ - start));
      if (name == "n" || name == "x") return [](double x) { return x; };
      if (name == "pi") return [](double) { return std::numbers::pi; };
      if (name == "e") return [](double) { return std::numbers::e; };
      return call(name, parse_args());
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` into a function of one variable (spelled `n` or `x`).
inline RealFunction parse_function(std::string_view text) {
  RealFunction f;
  f.fn = detail::ExpressionParser(text).parse();
  f.label = std::string(text);
  return f;
}

}  // namespace voronoi
