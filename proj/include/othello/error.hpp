#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace othello {

enum class ErrorCode {
  IllegalMove,
  NotTerminal,
  TruncatedFile,
  UnsupportedBoardSize,
  MalformedMoveByte,
  IllegalRecordedMove,
  CenterCell,
  BadMagic,
  VersionMismatch,
  ChecksumMismatch,
  ShapeMismatch,
  NoStage,
  InsufficientPositions,
  PolicyFault,
  EmptyDataset,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can dispatch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace othello
