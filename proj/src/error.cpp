// SPDX-License-Identifier: Apache-2.0

#include "ztc/error.hpp"

namespace ztc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kUnknownNode: return "unknown_node";
    case ErrorCode::kAntennaOnNonFarEdge: return "antenna_on_non_faredge";
    case ErrorCode::kInsufficientCapacity: return "insufficient_capacity";
    case ErrorCode::kAccounting: return "accounting_error";
    case ErrorCode::kAntennaUnavailable: return "antenna_unavailable";
    case ErrorCode::kUnknownDeployment: return "unknown_deployment";
    case ErrorCode::kInvalidState: return "invalid_state";
    case ErrorCode::kPoolExhausted: return "pool_exhausted";
    case ErrorCode::kUnknownUnit: return "unknown_unit";
    case ErrorCode::kDelivery: return "delivery_failed";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

}  // namespace ztc
