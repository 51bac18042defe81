#include "qfno/error.hpp"

namespace qfno {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnsupportedGateForRegisterShape: return "UnsupportedGateForRegisterShape";
    case ErrorCode::SectorCapExceeded: return "SectorCapExceeded";
    case ErrorCode::QubitCapExceeded: return "QubitCapExceeded";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::ZeroTarget: return "ZeroTarget";
    case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnsupportedLayout: return "UnsupportedLayout";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::BadResolution: return "BadResolution";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace qfno
