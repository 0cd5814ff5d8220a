#include "seedloop/error.hpp"

namespace seedloop {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::DimOverflow: return "DimOverflow";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::WOutOfRange: return "WOutOfRange";
    case ErrorCode::NoLabeledRegions: return "NoLabeledRegions";
    case ErrorCode::UnlabeledPrediction: return "UnlabeledPrediction";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyConfusion: return "EmptyConfusion";
    case ErrorCode::EmptySeeds: return "EmptySeeds";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace seedloop
