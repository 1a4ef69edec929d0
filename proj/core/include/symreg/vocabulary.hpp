#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "symreg/expr.hpp"

namespace symreg {

using TokenId = std::int32_t;

/// Extended: constants become an exponent token C<e> plus a mantissa.
/// Base: constants become a single `const` token plus the raw value.
enum class EncodingMode : std::uint8_t { Extended, Base };

std::string_view encoding_mode_name(EncodingMode mode);
EncodingMode encoding_mode_from_name(std::string_view name);

enum class TokenClass : std::uint8_t { Control, Integer, Variable, Binary, Unary, ConstantExponent, ConstantBase };

struct TokenInfo {
  std::string text;
  TokenClass cls = TokenClass::Control;
  /// Integer value, variable index or constant exponent, depending on `cls`.
  int value = 0;
  Op op = Op::Add;
};

inline constexpr int kMinExponent = -10;
inline constexpr int kMaxExponent = 10;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kStartToken = "<start>";
inline constexpr std::string_view kEndToken = "<end>";
inline constexpr std::string_view kBaseConstToken = "const";

class Vocabulary {
 public:
  /// Model vocabulary: 3 control tokens, integers -5..5, `n_variables`
  /// variables, 3 binary and 14 unary operators, then either C-10..C10
  /// (Extended, 54 tokens with two variables) or one `const` token (Base).
  static Vocabulary standard(EncodingMode mode = EncodingMode::Extended, int n_variables = 2);
  /// Token classes are inferred from the spelling.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  EncodingMode mode() const noexcept { return mode_; }
  int n_variables() const noexcept { return n_variables_; }

  std::optional<TokenId> find(std::string_view text) const;
  /// Throws MalformedSequence for unknown tokens.
  TokenId id(std::string_view text) const;
  const TokenInfo& info(TokenId id) const;
  const std::string& text(TokenId id) const { return info(id).text; }

  /// 2 for binary, 1 for unary, 0 for leaves, -1 for control tokens.
  int arity(TokenId id) const;
  bool is_constant_token(TokenId id) const;

  TokenId pad() const noexcept { return pad_; }
  TokenId start() const noexcept { return start_; }
  TokenId end() const noexcept { return end_; }

  std::optional<TokenId> integer_token(int value) const;
  std::optional<TokenId> variable_token(int index) const;
  std::optional<TokenId> op_token(Op op) const;
  std::optional<TokenId> exponent_token(int exponent) const;
  std::optional<TokenId> base_constant_token() const;

  /// "symreg-vocab 1" header line, then one token per line; ids are line indices.
  std::string serialize() const;
  static Vocabulary deserialize(std::string_view text);
  /// FNV-1a over the serialized form.
  std::uint64_t hash() const;

  const std::vector<TokenInfo>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.serialize() == b.serialize(); }

 private:
  std::vector<TokenInfo> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  EncodingMode mode_ = EncodingMode::Extended;
  int n_variables_ = 0;
  TokenId pad_ = -1, start_ = -1, end_ = -1;
};

std::string format_hash(std::uint64_t hash);

}  // namespace symreg
