#include "logsac/initial_condition.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace logsac {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Expression parse() {
    Expression e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression '" + text_ + "': " + what + " at position " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expression expr() {
    Expression lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) + b(x, y); };
      } else if (accept('-')) {
        lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) - b(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Expression term() {
    Expression lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) * b(x, y); };
      } else if (accept('/')) {
        lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) / b(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Expression unary() {
    if (accept('-')) {
      return [a = unary()](double x, double y) { return -a(x, y); };
    }
    if (accept('+')) return unary();
    return power();
  }

  Expression power() {
    Expression base = primary();
    if (accept('^')) {
      return [a = base, b = unary()](double x, double y) { return std::pow(a(x, y), b(x, y)); };
    }
    return base;
  }

  Expression primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return [v](double, double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return [](double x, double) { return x; };
      if (name == "y") return [](double, double y) { return y; };
      if (name == "pi") return [](double, double) { return std::numbers::pi; };

      static const std::map<std::string, double (*)(double)> functions = {
          {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
          {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
          {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
          {"abs", [](double v) { return std::abs(v); }},   {"tanh", [](double v) { return std::tanh(v); }},
      };
      const auto it = functions.find(name);
      if (it == functions.end()) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      Expression arg = expr();
      if (!accept(')')) fail("expected ')'");
      return [f = it->second, a = std::move(arg)](double x, double y) { return f(a(x, y)); };
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse_expression(const std::string& text) { return Parser(text).parse(); }

std::string resolve_initial_condition(const std::string& name) {
  static const std::map<std::string, std::string> presets = {
      {"fig1", "0.4*(cos(pi*x)*sin(pi*y) + sin(pi*x)*cos(2*pi*y)) + 0.2"},
      {"fig3", "0.4*(cos(pi*x)*sin(pi*y) + sin(pi*x)*cos(2*pi*y)) + 0.2"},
      {"fig1/3", "0.4*(cos(pi*x)*sin(pi*y) + sin(pi*x)*cos(2*pi*y)) + 0.2"},
      {"fig4", "0.5*cos(pi*x)*cos(pi*y) + 0.3"},
      {"fig5", "0.01*cos(pi*x)*sin(pi*y)"},
      {"fig6", "0.01*cos(pi*x)*sin(pi*y)"},
      {"zero", "0"},
  };
  const auto it = presets.find(name);
  return it == presets.end() ? name : it->second;
}

Field initial_condition(const std::string& name, BasisPtr basis) {
  const Expression f = parse_expression(resolve_initial_condition(name));
  const auto x = basis->coordinates();
  const std::size_t m = x.size();
  std::vector<double> values(basis->grid_size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      values[i * m + j] = f(x[i], x[j]);
      if (!std::isfinite(values[i * m + j])) {
        throw std::domain_error("initial condition '" + name + "' is not finite on the grid");
      }
    }
  }
  Field field = Field::from_grid(std::move(basis), std::move(values));
  return project(field, field.basis().modes());
}

}  // namespace logsac
