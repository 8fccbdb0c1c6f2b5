#include "segfuse/error.hpp"

namespace segfuse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::EmptySegmentation: return "EmptySegmentation";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::IncompleteTable: return "IncompleteTable";
    case ErrorCode::EmptyPhantom: return "EmptyPhantom";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::PayloadSizeMismatch: return "PayloadSizeMismatch";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateCase: return "DuplicateCase";
  }
  return "Unknown";
}

}  // namespace segfuse
