#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctpack {

enum class Errc {
  // layout
  DuplicateIdentifier,
  RaggedTier,
  NonConsecutiveTiers,
  EmptyLayout,
  OutOfBounds,
  // volume_io
  NoSlices,
  InconsistentDimensions,
  UnsupportedSampleType,
  OutOfRange,
  DecodeError,
  RangeOutOfBounds,
  DimsMismatch,
  NotRegistered,
  NonContiguousAppend,
  NotFinalized,
  ExceedsMemoryBudget,
  // segmentation
  InsufficientPeaks,
  DegenerateMask,
  FlatObjective,
  PeakCountMismatch,
  OutOfBoundsAfterClamp,
  // surfacing
  EmptyMesh,
  EmptyAfterClean,
  WriteError,
  // synth
  SpecInvalid,
  UnknownIdentifier,
  // pipeline
  MissingDecision,
  InvalidArgument,
  IoError,
  ParseError,
};

std::string_view to_string(Errc code) noexcept;

/// Error raised by every ctpack operation. `code()` identifies the failure
/// kind; `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  [[nodiscard]] Errc code() const noexcept { return code_; }
  /// The context text without the code prefix.
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace ctpack
