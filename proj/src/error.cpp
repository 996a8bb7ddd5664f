#include "cloudmirror/error.hpp"

namespace cloudmirror {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kPlacement: return "placement";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kOvercommit: return "overcommit";
    case ErrorCode::kLookup: return "lookup";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kMapping: return "mapping";
    case ErrorCode::kEmptyOverlap: return "empty_overlap";
    case ErrorCode::kInput: return "input";
    case ErrorCode::kScenario: return "scenario";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace cloudmirror
