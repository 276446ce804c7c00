// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fabscope {

enum class ErrorCode {
  invalid_argument,
  schema,
  invariant,
  unknown_device,
  no_route,
  invalid_spec,
  parse,
  grid_mismatch,
  io,
  missing_calibration,
};

/// Exception type thrown by every core operation. `rule()` names the
/// violated rule for schema/invariant failures; `line()` is 1-based and set
/// only for CSV parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string rule = {},
        std::size_t line = 0)
      : std::runtime_error(std::move(message)),
        code_(code),
        rule_(std::move(rule)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& rule() const noexcept { return rule_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string rule_;
  std::size_t line_;
};

}  // namespace fabscope
