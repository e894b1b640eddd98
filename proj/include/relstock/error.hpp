#pragma once

#include <stdexcept>
#include <string>

namespace relstock {

enum class ErrorKind {
  kParse,
  kValidation,
  kIo,
  kFileNotFound,
  kUniverseTooSmall,
  kInsufficientHistory,
  kWindowInvalid,
  kIntegrity,
  kSchema,
  kResolutionConflict,
  kUnknownTicker,
  kConfiguration,
  kEmptyGraph,
  kContract,
  kNumeric,
  kNoData,
  kBankruptcy,
  kZeroVariance,
  kInsufficientData,
  kMode,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and tests)
// can branch on the category without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace relstock
