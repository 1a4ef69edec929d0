#include "symreg/encoding.hpp"

#include <array>
#include <cmath>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

// Exact doubles 10^0 .. 10^10; negative exponents divide by these instead of
// multiplying by an inexact 10^-k.
constexpr std::array<double, 11> kPowersOfTen = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10};

double scale_down(double c, int e) {
  return e >= 0 ? c / kPowersOfTen[static_cast<std::size_t>(e)] : c * kPowersOfTen[static_cast<std::size_t>(-e)];
}

double scale_up(double m, int e) {
  return e >= 0 ? m * kPowersOfTen[static_cast<std::size_t>(e)] : m / kPowersOfTen[static_cast<std::size_t>(-e)];
}

}  // namespace

EncodedConstant encode_constant(double c) {
  const double mag = std::abs(c);
  if (!std::isfinite(c) || mag < kMinConstantMagnitude || mag > kMaxConstantMagnitude) {
    fail(ErrorCode::EncodingRange, "constant magnitude outside [1e-10, 1e10]");
  }
  const int guess = static_cast<int>(std::ceil(std::log10(mag)));
  // log10 rounding can land one decade off near exact powers of ten; take the
  // neighbouring exponent whose mantissa falls in (0.1, 1].
  for (int e : {guess, guess + 1, guess - 1}) {
    if (e < kMinExponent || e > kMaxExponent) continue;
    const double m = scale_down(c, e);
    if (std::abs(m) > 0.1 && std::abs(m) <= 1.0) return {e, m};
  }
  // Only reachable when the scaled value is a rounding step above 1 (e.g. the
  // double nearest 1e-10); snapping to +-1 decodes back to the same double.
  const int e = std::clamp(guess, kMinExponent, kMaxExponent);
  const double m = std::copysign(1.0, c);
  if (decode_constant({e, m}) != c) fail(ErrorCode::EncodingRange, "constant cannot be encoded");
  return {e, m};
}

double decode_constant(EncodedConstant e) {
  if (e.exponent < kMinExponent || e.exponent > kMaxExponent) {
    fail(ErrorCode::EncodingRange, "constant exponent outside [-10, 10]");
  }
  return scale_up(e.mantissa, e.exponent);
}

namespace {

void encode_node(const Expression& e, const Vocabulary& vocab, EncodingMode mode, TokenSequence& out) {
  std::optional<TokenId> id;
  double value = 0.0;
  switch (e.kind()) {
    case NodeKind::Binary:
    case NodeKind::Unary:
      id = vocab.op_token(e.op());
      if (!id) fail(ErrorCode::InvalidArgument, "operator not in vocabulary: " + std::string(op_name(e.op())));
      break;
    case NodeKind::Variable:
      id = vocab.variable_token(e.variable_index());
      if (!id) fail(ErrorCode::InvalidArgument, "variable not in vocabulary");
      break;
    case NodeKind::Integer:
      id = vocab.integer_token(e.integer_value());
      break;
    case NodeKind::Constant:
      if (mode == EncodingMode::Extended) {
        const auto enc = encode_constant(e.constant_value());
        id = vocab.exponent_token(enc.exponent);
        value = enc.mantissa;
      } else {
        const double c = e.constant_value();
        if (!std::isfinite(c) || std::abs(c) < kMinConstantMagnitude || std::abs(c) > kMaxConstantMagnitude) {
          fail(ErrorCode::EncodingRange, "constant magnitude outside [1e-10, 1e10]");
        }
        id = vocab.base_constant_token();
        value = c;
      }
      if (!id) fail(ErrorCode::EncodingRange, "vocabulary has no token for this constant");
      break;
  }
  out.symbols.push_back(*id);
  out.constants.push_back(value);
  for (const auto& c : e.children()) encode_node(c, vocab, mode, out);
}

class Decoder {
 public:
  Decoder(const TokenSequence& seq, const Vocabulary& vocab, EncodingMode mode)
      : seq_(seq), vocab_(vocab), mode_(mode) {}

  Expression run() {
    if (seq_.symbols.size() != seq_.constants.size()) malformed("symbol/constant length mismatch");
    if (seq_.symbols.empty()) malformed("empty sequence");
    auto e = node(0);
    if (pos_ != seq_.symbols.size()) malformed("trailing tokens after a complete expression");
    return e;
  }

 private:
  [[noreturn]] void malformed(const std::string& what) const {
    fail(ErrorCode::MalformedSequence, what + " (position " + std::to_string(pos_) + ")");
  }

  Expression node(int depth) {
    if (pos_ >= seq_.symbols.size()) malformed("truncated sequence: missing operand");
    if (depth > 4096) malformed("nesting too deep");
    const TokenId id = seq_.symbols[pos_];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) malformed("token id out of range");
    const TokenInfo& t = vocab_.info(id);
    const double c = seq_.constants[pos_];
    const bool constant_token = t.cls == TokenClass::ConstantExponent || t.cls == TokenClass::ConstantBase;
    if (!constant_token && c != 0.0) malformed("nonzero constant at a symbol position");
    ++pos_;
    switch (t.cls) {
      case TokenClass::Control:
        malformed("control token inside expression");
      case TokenClass::Integer:
        return Expression::integer(t.value);
      case TokenClass::Variable:
        return Expression::variable(t.value);
      case TokenClass::Binary: {
        auto lhs = node(depth + 1);
        auto rhs = node(depth + 1);
        return Expression::binary(t.op, std::move(lhs), std::move(rhs));
      }
      case TokenClass::Unary:
        return Expression::unary(t.op, node(depth + 1));
      case TokenClass::ConstantExponent: {
        if (mode_ != EncodingMode::Extended) malformed("exponent token in base encoding");
        if (c == 0.0 || !std::isfinite(c) || std::abs(c) > 1.0) malformed("constant token with invalid mantissa");
        return Expression::constant(decode_constant({t.value, c}));
      }
      case TokenClass::ConstantBase: {
        if (mode_ != EncodingMode::Base) malformed("const token in extended encoding");
        if (c == 0.0 || !std::isfinite(c)) malformed("const token with invalid value");
        return Expression::constant(c);
      }
    }
    malformed("unreachable");
  }

  const TokenSequence& seq_;
  const Vocabulary& vocab_;
  EncodingMode mode_;
  std::size_t pos_ = 0;
};

}  // namespace

TokenSequence encode_preorder(const Expression& expr, const Vocabulary& vocab, EncodingMode mode) {
  if (vocab.mode() != mode) fail(ErrorCode::InvalidArgument, "vocabulary does not support this encoding mode");
  TokenSequence out;
  out.symbols.reserve(expr.size());
  out.constants.reserve(expr.size());
  encode_node(expr, vocab, mode, out);
  return out;
}

Expression decode_preorder(const TokenSequence& seq, const Vocabulary& vocab, EncodingMode mode) {
  if (vocab.mode() != mode) fail(ErrorCode::InvalidArgument, "vocabulary does not support this encoding mode");
  return Decoder(seq, vocab, mode).run();
}

int open_slots(std::span<const TokenId> symbols, const Vocabulary& vocab) {
  int open = 1;
  for (TokenId id : symbols) {
    if (open <= 0) return -1;
    const int a = vocab.arity(id);
    if (a < 0) return -1;
    open += a - 1;
  }
  return open;
}

bool is_valid_preorder(std::span<const TokenId> symbols, const Vocabulary& vocab) {
  if (symbols.empty()) return false;
  int open = 1;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const int a = vocab.arity(symbols[i]);
    if (a < 0) return false;
    open += a - 1;
    if (open == 0) return i + 1 == symbols.size();
  }
  return false;
}

std::vector<std::string> token_strings(const TokenSequence& seq, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(seq.symbols.size());
  for (TokenId id : seq.symbols) out.push_back(vocab.text(id));
  return out;
}

TokenSequence sequence_from_strings(std::span<const std::string> symbols, std::span<const double> constants,
                                    const Vocabulary& vocab) {
  if (symbols.size() != constants.size()) fail(ErrorCode::MalformedSequence, "symbol/constant length mismatch");
  TokenSequence seq;
  seq.symbols.reserve(symbols.size());
  for (const auto& s : symbols) seq.symbols.push_back(vocab.id(s));
  seq.constants.assign(constants.begin(), constants.end());
  return seq;
}

}  // namespace symreg
