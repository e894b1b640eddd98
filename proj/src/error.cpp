#include "relstock/error.hpp"

namespace relstock {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kFileNotFound: return "file not found";
    case ErrorKind::kUniverseTooSmall: return "universe too small";
    case ErrorKind::kInsufficientHistory: return "insufficient history";
    case ErrorKind::kWindowInvalid: return "window invalid";
    case ErrorKind::kIntegrity: return "integrity error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kResolutionConflict: return "resolution conflict";
    case ErrorKind::kUnknownTicker: return "unknown ticker";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kEmptyGraph: return "empty graph";
    case ErrorKind::kContract: return "contract error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kNoData: return "no data";
    case ErrorKind::kBankruptcy: return "bankruptcy";
    case ErrorKind::kZeroVariance: return "zero variance";
    case ErrorKind::kInsufficientData: return "insufficient data";
    case ErrorKind::kMode: return "mode error";
  }
  return "error";
}

}  // namespace relstock
