#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "symreg/errors.hpp"
#include "symreg/expr.hpp"

namespace symreg {

namespace {

std::string variable_name(int index) {
  static constexpr const char* kNames[] = {"x", "y", "z"};
  if (index < 3) return kNames[index];
  return "x" + std::to_string(index);
}

std::string format_constant(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string_view infix_symbol(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    case Op::Pow: return " ^ ";
    default: return "";
  }
}

void print(const Expression& e, std::string& out, bool parenthesize) {
  switch (e.kind()) {
    case NodeKind::Variable:
      out += variable_name(e.variable_index());
      return;
    case NodeKind::Integer:
    case NodeKind::Constant: {
      const bool negative = e.kind() == NodeKind::Integer ? e.integer_value() < 0 : std::signbit(e.constant_value());
      const std::string text = e.kind() == NodeKind::Integer ? std::to_string(e.integer_value())
                                                             : format_constant(e.constant_value());
      if (negative && parenthesize) {
        out += '(' + text + ')';
      } else {
        out += text;
      }
      return;
    }
    case NodeKind::Unary:
      out += op_name(e.op());
      out += '(';
      print(e.child(0), out, false);
      out += ')';
      return;
    case NodeKind::Binary:
      if (parenthesize) out += '(';
      print(e.child(0), out, true);
      out += infix_symbol(e.op());
      print(e.child(1), out, true);
      if (parenthesize) out += ')';
      return;
  }
}

void print_prefix(const Expression& e, std::string& out) {
  if (!out.empty()) out += ' ';
  switch (e.kind()) {
    case NodeKind::Variable: out += variable_name(e.variable_index()); break;
    case NodeKind::Integer: out += std::to_string(e.integer_value()); break;
    case NodeKind::Constant: out += format_constant(e.constant_value()); break;
    default: out += op_name(e.op()); break;
  }
  for (const auto& c : e.children()) print_prefix(c, out);
}

Expression make_number(double value, bool integral) {
  if (integral && value >= kMinIntegerLeaf && value <= kMaxIntegerLeaf) {
    return Expression::integer(static_cast<int>(value));
  }
  return Expression::constant(value);
}

// expr   := term (('+' | '-') term)*
// term   := unary (('*' | '/') unary)*
// unary  := '-' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse() {
    auto e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) error("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::InvalidArgument,
         "cannot parse expression '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + what);
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

  Expression parse_sum() {
    auto lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expression::binary(Op::Add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = Expression::binary(Op::Sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expression parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expression::binary(Op::Mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = Expression::binary(Op::Div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expression parse_unary() {
    if (accept('-')) {
      auto operand = parse_unary();
      if (operand.kind() == NodeKind::Integer && operand.integer_value() > 0) {
        return Expression::integer(-operand.integer_value());
      }
      if (operand.kind() == NodeKind::Constant && last_was_literal_) {
        return Expression::constant(-operand.constant_value());
      }
      return Expression::unary(Op::Neg, std::move(operand));
    }
    return parse_power();
  }

  Expression parse_power() {
    auto base = parse_atom();
    if (accept('^')) {
      last_was_literal_ = false;
      return Expression::binary(Op::Pow, std::move(base), parse_unary());
    }
    return base;
  }

  Expression parse_atom() {
    skip_space();
    last_was_literal_ = false;
    if (pos_ >= text_.size()) error("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    error(std::string("unexpected character '") + c + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    bool integral = true;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.') {
        integral = false;
        ++pos_;
      } else if ((c == 'e' || c == 'E') && pos_ + 1 < text_.size()) {
        integral = false;
        ++pos_;
        if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
      } else {
        break;
      }
    }
    double value = 0.0;
    const auto* first = text_.data() + start;
    const auto* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) error("bad number");
    last_was_literal_ = true;
    return make_number(value, integral);
  }

  Expression parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    if (name == "x") return Expression::variable(0);
    if (name == "y") return Expression::variable(1);
    if (name == "z") return Expression::variable(2);
    if (name == "pi") {
      last_was_literal_ = true;
      return Expression::constant(std::numbers::pi);
    }
    if (name == "log") name = "ln";
    auto op = op_from_name(name);
    if (!op || arity(*op) != 1) error("unknown function '" + name + "'");
    if (!accept('(')) error("expected '(' after " + name);
    auto arg = parse_sum();
    if (!accept(')')) error("expected ')'");
    return Expression::unary(*op, std::move(arg));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool last_was_literal_ = false;
};

}  // namespace

std::string to_infix(const Expression& e) {
  std::string out;
  print(e, out, false);
  return out;
}

std::string to_prefix(const Expression& e) {
  std::string out;
  print_prefix(e, out);
  return out;
}

Expression parse_infix(std::string_view text) { return Parser(text).parse(); }

}  // namespace symreg
