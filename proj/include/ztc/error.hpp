// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ztc {

enum class ErrorCode {
  kParse,
  kInvalidArgument,
  kDuplicateId,
  kUnknownNode,
  kAntennaOnNonFarEdge,
  kInsufficientCapacity,
  kAccounting,
  kAntennaUnavailable,
  kUnknownDeployment,
  kInvalidState,
  kPoolExhausted,
  kUnknownUnit,
  kDelivery,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the control plane surface as this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ztc
