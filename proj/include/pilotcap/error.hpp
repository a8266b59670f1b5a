// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pilotcap {

enum class Errc {
  non_positive_gamma,
  empty_user_set,
  zero_pilot_length,
  invalid_argument,
  length_mismatch,
  dimension_mismatch,
  not_majorized,
  numerical_failure,
  infeasible_requirements,
  construction_failure,
  invalid_dimensions,
  invalid_grouping,
  no_feasible_scale,
  infeasible_fixed_part,
  zero_norm_estimate,
  config_parse_error,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pilotcap
