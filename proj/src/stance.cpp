#include "stancebench/stance.hpp"

#include "stancebench/error.hpp"

namespace stancebench {

std::string_view to_string(StanceLabel label) {
  switch (label) {
    case StanceLabel::Against: return "against";
    case StanceLabel::Favor: return "favor";
    case StanceLabel::None: return "none";
  }
  return "none";
}

std::optional<StanceLabel> parse_stance(std::string_view text) {
  for (auto label : kAllLabels) {
    if (text == to_string(label)) return label;
  }
  return std::nullopt;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::DanglingParent: return "DanglingParent";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InsufficientThreads: return "InsufficientThreads";
    case ErrorKind::NeedsMoreAnnotators: return "NeedsMoreAnnotators";
    case ErrorKind::DegenerateMarginals: return "DegenerateMarginals";
    case ErrorKind::NoEligiblePairs: return "NoEligiblePairs";
    case ErrorKind::LeaseInvalid: return "LeaseInvalid";
    case ErrorKind::AlreadyLabeled: return "AlreadyLabeled";
    case ErrorKind::UnknownInstance: return "UnknownInstance";
    case ErrorKind::TemplateInvalid: return "TemplateInvalid";
    case ErrorKind::EmptyConversation: return "EmptyConversation";
    case ErrorKind::TokenOutOfRange: return "TokenOutOfRange";
    case ErrorKind::ImageMissing: return "ImageMissing";
    case ErrorKind::PatchGridError: return "PatchGridError";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::NumericalError: return "NumericalError";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::NoTargetTokens: return "NoTargetTokens";
    case ErrorKind::CheckpointError: return "CheckpointError";
    case ErrorKind::ImageDecodeError: return "ImageDecodeError";
    case ErrorKind::CaptionFailed: return "CaptionFailed";
    case ErrorKind::PredictionGoldMismatch: return "PredictionGoldMismatch";
    case ErrorKind::DepthOutOfRange: return "DepthOutOfRange";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace stancebench
