// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clinlogic {

enum class ErrorCode {
  unknown_kind,
  illegal_attribute,
  missing_node,
  missing_edge,
  illegal_relation,
  parse_error,
  schema_violation,
  io_error,
  infeasible_config,
  invalid_argument,
  dimension_mismatch,
  syntax_error,
  unknown_symbol,
  uncovered_attribute,
  empty_input,
  no_repair_found,
  stale_candidate,
  illegal_edit,
  diverged_loss,
  missing_label,
  service_not_ready,
  already_resolved,
  unknown_item,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every domain failure surfaces as this exception; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace clinlogic
