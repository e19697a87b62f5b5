#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dcrypps {

// 1-based position inside an input document.
struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;

  std::string to_string() const {
    std::string prefix = file.empty() ? std::string("<input>") : file;
    return prefix + ":" + std::to_string(line) + ":" + std::to_string(column);
  }

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ErrorCode : std::uint8_t {
  kParse,          // malformed text (delimiters, tokens, forms)
  kUnsupported,    // recognised but unsupported DSL construct
  kModel,          // instantiation / structural model errors
  kReference,      // unresolved identifier
  kSchema,         // KB or config document violates its schema
  kInvalidArgument,
  kNotFound,
  kConflict,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kUnsupported: return "unsupported_form";
    case ErrorCode::kModel: return "model_error";
    case ErrorCode::kReference: return "unresolved_reference";
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<SourceSpan> span = std::nullopt)
      : std::runtime_error(span ? span->to_string() + ": " + message : message),
        code_(code),
        detail_(message),
        span_(std::move(span)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::optional<SourceSpan>& span() const noexcept { return span_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<SourceSpan> span_;
};

}  // namespace dcrypps
