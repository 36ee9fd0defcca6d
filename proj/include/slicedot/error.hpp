#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace slicedot {

enum class ErrorCode {
  DimensionMismatch,
  NegativeWeight,
  NonFinite,
  EmptyInput,
  MassMismatch,
  InvalidArgument,
  DegenerateDirection,
  OverlappingSupports,
  ProvenanceMismatch,
  Parse,
  Numerical,
};

const char* to_string(ErrorCode code);

/// Every validation or numerical failure raised by the library.
/// `index` names the offending atom / row when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MassMismatch: return "MassMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::OverlappingSupports: return "OverlappingSupports";
    case ErrorCode::ProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Numerical: return "Numerical";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what,
                              std::optional<std::size_t> index = std::nullopt) {
  throw Error(code, what, index);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace slicedot
