#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace motionalign {

enum class ErrorKind {
  MissingFile,
  UnsupportedFormat,
  CorruptData,
  EmptyImage,
  BadMagic,
  DimensionMismatch,
  IoFailure,
  UnresolvedPrecomputedFlow,
  InvalidConfig,
  NonFiniteLoss,
  DegenerateGroup,
  AllGroupsFiltered,
  ParseError,
  DuplicateId,
  MissingReferencedFile,
  InsufficientModels,
  WeightMismatch,
  WeightSumInvalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure surfaced by the library is an Error tagged with its kind, so
// callers (the batch harness in particular) can record and continue.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace motionalign
