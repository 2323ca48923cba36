#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdyb {

enum class ErrorKind {
  UnsupportedType,
  DimensionMismatch,
  AlgebraMismatch,
  NearPole,
  NotDynamical,
  NotTransverse,
  NotClassifiable,
  CayleyPole,
  JetMissing,
  InvalidInput,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedType: return "UnsupportedType";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AlgebraMismatch: return "AlgebraMismatch";
    case ErrorKind::NearPole: return "NearPole";
    case ErrorKind::NotDynamical: return "NotDynamical";
    case ErrorKind::NotTransverse: return "NotTransverse";
    case ErrorKind::NotClassifiable: return "NotClassifiable";
    case ErrorKind::CayleyPole: return "CayleyPole";
    case ErrorKind::JetMissing: return "JetMissing";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to a stable reason string.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// what() without the kind prefix
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace cdyb
