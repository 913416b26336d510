#include "mixeq/error.hpp"

namespace mixeq {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_network: return "InvalidNetwork";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::no_path_exists: return "NoPathExists";
    case Errc::path_budget_exceeded: return "PathBudgetExceeded";
    case Errc::unknown_link: return "UnknownLink";
    case Errc::empty_support: return "EmptySupport";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::infeasible_flow: return "InfeasibleFlow";
    case Errc::no_valid_support: return "NoValidSupport";
    case Errc::degenerate_system: return "DegenerateSystem";
    case Errc::grid_budget_exceeded: return "GridBudgetExceeded";
    case Errc::not_path_multigraph: return "NotPathMultigraph";
    case Errc::requires_linear_costs: return "RequiresLinearCosts";
    case Errc::singular_mv: return "SingularMv";
    case Errc::schema_error: return "SchemaError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace mixeq
