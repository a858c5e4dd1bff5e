#pragma once

#include <stdexcept>
#include <string>

namespace inquire {

enum class ErrorCode {
  Parse,
  MalformedCase,
  RejectedEvidence,
  EmptyBelief,
  InvalidTemperature,
  EmptyDiagnosisSet,
  DegenerateInput,
  EmptyQuestionSet,
  ProviderFailure,
  MalformedDifferential,
  InconsistentEvidence,
  InvalidConfig,
  InvalidMatrix,
  InvalidWorld,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::MalformedCase: return "malformed_case";
    case ErrorCode::RejectedEvidence: return "rejected_evidence";
    case ErrorCode::EmptyBelief: return "empty_belief";
    case ErrorCode::InvalidTemperature: return "invalid_temperature";
    case ErrorCode::EmptyDiagnosisSet: return "empty_diagnosis_set";
    case ErrorCode::DegenerateInput: return "degenerate_input";
    case ErrorCode::EmptyQuestionSet: return "empty_question_set";
    case ErrorCode::ProviderFailure: return "provider_failure";
    case ErrorCode::MalformedDifferential: return "malformed_differential";
    case ErrorCode::InconsistentEvidence: return "inconsistent_evidence";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::InvalidMatrix: return "invalid_matrix";
    case ErrorCode::InvalidWorld: return "invalid_world";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& what) : Error(C, what) {}
};

using ParseError = CodedError<ErrorCode::Parse>;
using MalformedCase = CodedError<ErrorCode::MalformedCase>;
using RejectedEvidence = CodedError<ErrorCode::RejectedEvidence>;
using EmptyBelief = CodedError<ErrorCode::EmptyBelief>;
using InvalidTemperature = CodedError<ErrorCode::InvalidTemperature>;
using EmptyDiagnosisSet = CodedError<ErrorCode::EmptyDiagnosisSet>;
using DegenerateInput = CodedError<ErrorCode::DegenerateInput>;
using EmptyQuestionSet = CodedError<ErrorCode::EmptyQuestionSet>;
using MalformedDifferential = CodedError<ErrorCode::MalformedDifferential>;
using InconsistentEvidence = CodedError<ErrorCode::InconsistentEvidence>;
using ConfigError = CodedError<ErrorCode::InvalidConfig>;
using InvalidMatrix = CodedError<ErrorCode::InvalidMatrix>;
using InvalidWorld = CodedError<ErrorCode::InvalidWorld>;

// Transport or model failure. Retryable failures (timeouts, 429, 5xx) are
// retried by the caller a bounded number of times.
class ProviderFailure : public Error {
 public:
  ProviderFailure(const std::string& what, bool retryable)
      : Error(ErrorCode::ProviderFailure, what), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace inquire
