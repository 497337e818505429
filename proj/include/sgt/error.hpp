#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgt {

enum class ErrorCode {
    InvalidArgument,
    DegeneratePose,
    EmptyDataset,
    SequenceTooShort,
    DegenerateVariance,
    RangeOutOfBounds,
    LengthMismatch,
    EmptyAudio,
    TtsUnavailable,
    AlignerUnavailable,
    ShapeMismatch,
    CorruptCheckpoint,
    VersionMismatch,
    NonFiniteLoss,
    DimensionMismatch,
    EmptySet,
    NoMaskedFrames,
    ModelNotLoaded,
    DuplicateKeyIndex,
    IndexOutOfRange,
    UnknownGesture,
    InvalidSpeedLevel,
    SchemaViolation,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegeneratePose: return "DegeneratePose";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::RangeOutOfBounds: return "RangeOutOfBounds";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::TtsUnavailable: return "TtsUnavailable";
    case ErrorCode::AlignerUnavailable: return "AlignerUnavailable";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NoMaskedFrames: return "NoMaskedFrames";
    case ErrorCode::ModelNotLoaded: return "ModelNotLoaded";
    case ErrorCode::DuplicateKeyIndex: return "DuplicateKeyIndex";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnknownGesture: return "UnknownGesture";
    case ErrorCode::InvalidSpeedLevel: return "InvalidSpeedLevel";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

// All library failures surface as sgt::Error; code() identifies the kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sgt
