#include "ctpack/error.hpp"

namespace ctpack {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateIdentifier: return "DuplicateIdentifier";
    case Errc::RaggedTier: return "RaggedTier";
    case Errc::NonConsecutiveTiers: return "NonConsecutiveTiers";
    case Errc::EmptyLayout: return "EmptyLayout";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::NoSlices: return "NoSlices";
    case Errc::InconsistentDimensions: return "InconsistentDimensions";
    case Errc::UnsupportedSampleType: return "UnsupportedSampleType";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DecodeError: return "DecodeError";
    case Errc::RangeOutOfBounds: return "RangeOutOfBounds";
    case Errc::DimsMismatch: return "DimsMismatch";
    case Errc::NotRegistered: return "NotRegistered";
    case Errc::NonContiguousAppend: return "NonContiguousAppend";
    case Errc::NotFinalized: return "NotFinalized";
    case Errc::ExceedsMemoryBudget: return "ExceedsMemoryBudget";
    case Errc::InsufficientPeaks: return "InsufficientPeaks";
    case Errc::DegenerateMask: return "DegenerateMask";
    case Errc::FlatObjective: return "FlatObjective";
    case Errc::PeakCountMismatch: return "PeakCountMismatch";
    case Errc::OutOfBoundsAfterClamp: return "OutOfBoundsAfterClamp";
    case Errc::EmptyMesh: return "EmptyMesh";
    case Errc::EmptyAfterClean: return "EmptyAfterClean";
    case Errc::WriteError: return "WriteError";
    case Errc::SpecInvalid: return "SpecInvalid";
    case Errc::UnknownIdentifier: return "UnknownIdentifier";
    case Errc::MissingDecision: return "MissingDecision";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace ctpack
