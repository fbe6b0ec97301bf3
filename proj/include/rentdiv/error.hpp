#pragma once

#include <stdexcept>
#include <string>

namespace rentdiv {

enum class ErrorCode {
  InvalidInput,       // malformed economy, allocation, document or argument
  UnknownId,          // agent/room/session id not present
  Precondition,       // operation called outside its contract
  InternalInvariant,  // a guarantee of the algorithms was violated: a bug
  SessionDone,        // elicitation session has no further questions
};

inline const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::UnknownId: return "unknown_id";
    case ErrorCode::Precondition: return "precondition_failed";
    case ErrorCode::InternalInvariant: return "internal_invariant";
    case ErrorCode::SessionDone: return "session_done";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rentdiv
