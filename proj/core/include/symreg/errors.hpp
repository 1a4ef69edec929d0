#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symreg {

/// Domain error categories. The numeric values double as process exit codes
/// for the command line tool, so they must stay stable.
enum class ErrorCode : int {
  InvalidArgument = 3,
  EncodingRange = 10,
  MalformedSequence = 11,
  FoldError = 12,
  Io = 13,
  CorpusFormat = 14,
  Checkpoint = 15,
  SequenceTooLong = 16,
  Divergence = 17,
  AllCandidatesFailed = 18,
  FewerThanHalfFinite = 19,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace symreg
