// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace plc {

enum class Errc {
  // calibration
  MissingKey,
  MalformedMatrix,
  NonOrthonormalRotation,
  // maps
  DimensionMismatch,
  EvenKernel,
  UnsupportedBitDepth,
  NotSingleChannel,
  // clouds / binary formats
  TruncatedRecord,
  WrongFrame,
  EmptyCloud,
  MaskMismatch,
  // ground plane
  DegenerateSample,
  TooFewPoints,
  // labels / evaluation
  FieldCount,
  BadNumber,
  UnknownClass,
  FrameMismatch,
  // generic
  DegenerateScene,
  InvalidArgument,
  IoError,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void throw_error(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace plc
