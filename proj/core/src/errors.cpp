#include "symreg/errors.hpp"

namespace symreg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EncodingRange: return "EncodingRange";
    case ErrorCode::MalformedSequence: return "MalformedSequence";
    case ErrorCode::FoldError: return "FoldError";
    case ErrorCode::Io: return "Io";
    case ErrorCode::CorpusFormat: return "CorpusFormat";
    case ErrorCode::Checkpoint: return "Checkpoint";
    case ErrorCode::SequenceTooLong: return "SequenceTooLong";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::AllCandidatesFailed: return "AllCandidatesFailed";
    case ErrorCode::FewerThanHalfFinite: return "FewerThanHalfFinite";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace symreg
