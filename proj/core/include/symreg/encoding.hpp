#pragma once

#include <span>
#include <vector>

#include "symreg/expr.hpp"
#include "symreg/vocabulary.hpp"

namespace symreg {

/// C = mantissa * 10^exponent with |mantissa| in (0.1, 1] and the sign on the mantissa.
struct EncodedConstant {
  int exponent = 0;
  double mantissa = 0.0;
};

/// Throws EncodingRange unless 1e-10 <= |c| <= 1e10.
EncodedConstant encode_constant(double c);
double decode_constant(EncodedConstant e);

/// Aligned symbol ids and constant values. `constants[i]` is nonzero only at
/// constant-token positions.
struct TokenSequence {
  std::vector<TokenId> symbols;
  std::vector<double> constants;

  std::size_t size() const noexcept { return symbols.size(); }
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

TokenSequence encode_preorder(const Expression& expr, const Vocabulary& vocab, EncodingMode mode);
/// Throws MalformedSequence on arity underflow/overflow, truncation, unknown
/// or control tokens, or a constant token without a usable value.
Expression decode_preorder(const TokenSequence& seq, const Vocabulary& vocab, EncodingMode mode);

/// Arity-counter scan: starts at 1, +1 per binary, -1 per leaf; valid when it
/// reaches 0 exactly at the last symbol and never before.
bool is_valid_preorder(std::span<const TokenId> symbols, const Vocabulary& vocab);

/// Number of operands still missing after `symbols`; 0 for a complete prefix,
/// negative when the prefix already overflowed.
int open_slots(std::span<const TokenId> symbols, const Vocabulary& vocab);

std::vector<std::string> token_strings(const TokenSequence& seq, const Vocabulary& vocab);
TokenSequence sequence_from_strings(std::span<const std::string> symbols, std::span<const double> constants,
                                    const Vocabulary& vocab);

}  // namespace symreg
