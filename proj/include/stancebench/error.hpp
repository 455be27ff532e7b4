#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stancebench {

// Error categories surfaced by every module. The CLI prints the name as the
// machine-parsable first token of its error line.
enum class ErrorKind {
  // corpus
  MalformedLine,
  DanglingParent,
  CycleDetected,
  EmptyCorpus,
  InsufficientThreads,
  // annotation
  NeedsMoreAnnotators,
  DegenerateMarginals,
  NoEligiblePairs,
  LeaseInvalid,
  AlreadyLabeled,
  UnknownInstance,
  // prompt
  TemplateInvalid,
  EmptyConversation,
  TokenOutOfRange,
  ImageMissing,
  // vision / fusion
  PatchGridError,
  DimensionError,
  NumericalError,
  SequenceTooLong,
  NoTargetTokens,
  CheckpointError,
  ImageDecodeError,
  CaptionFailed,
  // eval
  PredictionGoldMismatch,
  DepthOutOfRange,
  ProtocolError,
  // plumbing
  ConfigInvalid,
  IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace stancebench
