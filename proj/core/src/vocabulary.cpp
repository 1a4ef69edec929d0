#include "symreg/vocabulary.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

constexpr std::string_view kHeader = "symreg-vocab 1";

constexpr Op kVocabularyOps[] = {
    Op::Add,  Op::Mul,  Op::Pow, Op::Sqrt, Op::Pow2, Op::Pow3, Op::Ln,   Op::Exp, Op::Sin,
    Op::Cos,  Op::Tan,  Op::Cot, Op::Asin, Op::Acos, Op::Atan, Op::Acot, Op::Neg,
};

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

TokenInfo classify(const std::string& text) {
  TokenInfo t;
  t.text = text;
  if (text == kPadToken || text == kStartToken || text == kEndToken) {
    t.cls = TokenClass::Control;
  } else if (text == kBaseConstToken) {
    t.cls = TokenClass::ConstantBase;
  } else if (text == "x" || text == "y" || text == "z") {
    t.cls = TokenClass::Variable;
    t.value = text[0] - 'x';
  } else if (text.size() > 1 && text[0] == 'C' && parse_int(std::string_view(text).substr(1))) {
    t.cls = TokenClass::ConstantExponent;
    t.value = *parse_int(std::string_view(text).substr(1));
  } else if (auto v = parse_int(text)) {
    t.cls = TokenClass::Integer;
    t.value = *v;
  } else if (auto op = op_from_name(text); op && in_vocabulary(*op)) {
    t.cls = arity(*op) == 2 ? TokenClass::Binary : TokenClass::Unary;
    t.op = *op;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown vocabulary token '" + text + "'");
  }
  return t;
}

}  // namespace

std::string_view encoding_mode_name(EncodingMode mode) {
  return mode == EncodingMode::Extended ? "extended" : "base";
}

EncodingMode encoding_mode_from_name(std::string_view name) {
  if (name == "extended") return EncodingMode::Extended;
  if (name == "base") return EncodingMode::Base;
  fail(ErrorCode::InvalidArgument, "unknown encoding mode '" + std::string(name) + "'");
}

Vocabulary Vocabulary::standard(EncodingMode mode, int n_variables) {
  if (n_variables < 1 || n_variables > 3) fail(ErrorCode::InvalidArgument, "n_variables must be 1..3");
  std::vector<std::string> tokens = {std::string(kPadToken), std::string(kStartToken), std::string(kEndToken)};
  for (int v = kMinIntegerLeaf; v <= kMaxIntegerLeaf; ++v) tokens.push_back(std::to_string(v));
  for (int i = 0; i < n_variables; ++i) tokens.push_back(std::string(1, static_cast<char>('x' + i)));
  for (Op op : kVocabularyOps) tokens.emplace_back(op_name(op));
  if (mode == EncodingMode::Extended) {
    for (int e = kMinExponent; e <= kMaxExponent; ++e) tokens.push_back("C" + std::to_string(e));
  } else {
    tokens.emplace_back(kBaseConstToken);
  }
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  bool has_exponent = false, has_base = false;
  for (auto& text : tokens) {
    auto info = classify(text);
    const auto id = static_cast<TokenId>(v.tokens_.size());
    if (!v.index_.emplace(info.text, id).second) {
      fail(ErrorCode::InvalidArgument, "duplicate vocabulary token '" + info.text + "'");
    }
    if (info.text == kPadToken) v.pad_ = id;
    if (info.text == kStartToken) v.start_ = id;
    if (info.text == kEndToken) v.end_ = id;
    if (info.cls == TokenClass::Variable) v.n_variables_ = std::max(v.n_variables_, info.value + 1);
    has_exponent |= info.cls == TokenClass::ConstantExponent;
    has_base |= info.cls == TokenClass::ConstantBase;
    v.tokens_.push_back(std::move(info));
  }
  if (v.pad_ < 0 || v.start_ < 0 || v.end_ < 0) fail(ErrorCode::InvalidArgument, "vocabulary lacks control tokens");
  if (has_exponent == has_base) {
    fail(ErrorCode::InvalidArgument, "vocabulary must contain exactly one kind of constant token");
  }
  v.mode_ = has_exponent ? EncodingMode::Extended : EncodingMode::Base;
  return v;
}

std::optional<TokenId> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view text) const {
  auto id = find(text);
  if (!id) fail(ErrorCode::MalformedSequence, "token not in vocabulary: '" + std::string(text) + "'");
  return *id;
}

const TokenInfo& Vocabulary::info(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    fail(ErrorCode::MalformedSequence, "token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::arity(TokenId id) const {
  switch (info(id).cls) {
    case TokenClass::Control: return -1;
    case TokenClass::Binary: return 2;
    case TokenClass::Unary: return 1;
    default: return 0;
  }
}

bool Vocabulary::is_constant_token(TokenId id) const {
  const auto cls = info(id).cls;
  return cls == TokenClass::ConstantExponent || cls == TokenClass::ConstantBase;
}

std::optional<TokenId> Vocabulary::integer_token(int value) const { return find(std::to_string(value)); }

std::optional<TokenId> Vocabulary::variable_token(int index) const {
  if (index < 0 || index > 2) return std::nullopt;
  return find(std::string(1, static_cast<char>('x' + index)));
}

std::optional<TokenId> Vocabulary::op_token(Op op) const { return find(op_name(op)); }

std::optional<TokenId> Vocabulary::exponent_token(int exponent) const { return find("C" + std::to_string(exponent)); }

std::optional<TokenId> Vocabulary::base_constant_token() const { return find(kBaseConstToken); }

std::string Vocabulary::serialize() const {
  std::string out(kHeader);
  out += '\n';
  for (const auto& t : tokens_) {
    out += t.text;
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || line != kHeader) {
    fail(ErrorCode::InvalidArgument, "vocabulary: missing or unsupported header");
  }
  std::vector<std::string> tokens;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_hash(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace symreg
