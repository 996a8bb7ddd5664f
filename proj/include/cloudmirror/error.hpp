#pragma once

#include <stdexcept>
#include <string>

namespace cloudmirror {

/// Failure classes surfaced by every module. The numeric values are shared
/// with the C API status codes in cloudmirror.h.
enum class ErrorCode : int {
  kParse = 1,          // malformed document
  kValidation = 2,     // well-formed document violating an invariant
  kPlacement = 3,      // cloudlet references an unknown VM
  kConfiguration = 4,  // invalid host/VM/cloudlet configuration
  kOvercommit = 5,     // more pod cores than node cores
  kLookup = 6,         // unknown subject or VM in a result
  kNotFound = 7,       // charger id or nearest query on an empty registry
  kDomain = 8,         // argument outside its mathematical domain
  kMapping = 9,        // span instance absent from the snapshot
  kEmptyOverlap = 10,  // series with disjoint time ranges
  kInput = 11,         // comparison inputs share no subject
  kScenario = 12,      // invalid or unsatisfiable scenario
  kIo = 13,            // file could not be read or written
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cloudmirror
