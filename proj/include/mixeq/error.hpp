#pragma once

#include <stdexcept>
#include <string>

namespace mixeq {

enum class Errc {
  invalid_network,
  invalid_argument,
  no_path_exists,
  path_budget_exceeded,
  unknown_link,
  empty_support,
  dimension_mismatch,
  infeasible_flow,
  no_valid_support,
  degenerate_system,
  grid_budget_exceeded,
  not_path_multigraph,
  requires_linear_costs,
  singular_mv,
  schema_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mixeq
