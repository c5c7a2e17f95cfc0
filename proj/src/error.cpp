// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/error.hpp"

namespace plc {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingKey: return "MissingKey";
    case Errc::MalformedMatrix: return "MalformedMatrix";
    case Errc::NonOrthonormalRotation: return "NonOrthonormalRotation";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EvenKernel: return "EvenKernel";
    case Errc::UnsupportedBitDepth: return "UnsupportedBitDepth";
    case Errc::NotSingleChannel: return "NotSingleChannel";
    case Errc::TruncatedRecord: return "TruncatedRecord";
    case Errc::WrongFrame: return "WrongFrame";
    case Errc::EmptyCloud: return "EmptyCloud";
    case Errc::MaskMismatch: return "MaskMismatch";
    case Errc::DegenerateSample: return "DegenerateSample";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::FieldCount: return "FieldCount";
    case Errc::BadNumber: return "BadNumber";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::FrameMismatch: return "FrameMismatch";
    case Errc::DegenerateScene: return "DegenerateScene";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace plc
