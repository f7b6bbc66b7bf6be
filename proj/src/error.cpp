// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/error.hpp"

namespace clinlogic {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::unknown_kind: return "UnknownKind";
    case ErrorCode::illegal_attribute: return "IllegalAttribute";
    case ErrorCode::missing_node: return "MissingNode";
    case ErrorCode::missing_edge: return "MissingEdge";
    case ErrorCode::illegal_relation: return "IllegalRelation";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::schema_violation: return "SchemaViolation";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::infeasible_config: return "InfeasibleConfig";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::unknown_symbol: return "UnknownSymbol";
    case ErrorCode::uncovered_attribute: return "UncoveredAttribute";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::no_repair_found: return "NoRepairFound";
    case ErrorCode::stale_candidate: return "StaleCandidate";
    case ErrorCode::illegal_edit: return "IllegalEdit";
    case ErrorCode::diverged_loss: return "DivergedLoss";
    case ErrorCode::missing_label: return "MissingLabel";
    case ErrorCode::service_not_ready: return "ServiceNotReady";
    case ErrorCode::already_resolved: return "AlreadyResolved";
    case ErrorCode::unknown_item: return "UnknownItem";
  }
  return "Error";
}

}  // namespace clinlogic
