#include "motionalign/error.hpp"

namespace motionalign {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptData: return "CorruptData";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnresolvedPrecomputedFlow: return "UnresolvedPrecomputedFlow";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::DegenerateGroup: return "DegenerateGroup";
    case ErrorKind::AllGroupsFiltered: return "AllGroupsFiltered";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::MissingReferencedFile: return "MissingReferencedFile";
    case ErrorKind::InsufficientModels: return "InsufficientModels";
    case ErrorKind::WeightMismatch: return "WeightMismatch";
    case ErrorKind::WeightSumInvalid: return "WeightSumInvalid";
  }
  return "Unknown";
}

}  // namespace motionalign
