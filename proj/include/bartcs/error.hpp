#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bartcs {

enum class ErrorCode {
  ConstantOutcome,
  NotBinary,
  EmptyArm,
  InvalidDataset,
  InvalidConfig,
  DegenerateSimplex,
  SchemeMismatch,
  OutOfSupport,
  EmptyGrid,
  EmptyTrace,
  SetNesting,
  ChainLengthMismatch,
  MissingColumn,
  ParseError,
  MissingValue,
  ExposureDomainError,
  MissingArtifact,
  UnsupportedForBinary,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so the
// CLI can print a stable `ERROR <code>:` prefix.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bartcs
