#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixeq/oracle.hpp"
#include "mixeq/solver.hpp"

namespace mixeq {

/// Path flows at or below this are treated as unused.
inline constexpr double kUsedPathThreshold = 1e-9;
/// Separation needed between the two smallest autonomous path costs for q
/// to count as the unique minimizer.
inline constexpr double kUniquenessMargin = 1e-9;

/// True iff mixed_x_h <= baseline_x entrywise (slack 1e-10). Only a
/// sufficient test: another witness pair may exist when this one fails.
bool check_improvement(const Vector& baseline_x, const Vector& mixed_x_h);

/// Baseline equilibrium path flow built from a mixed equilibrium on a path
/// multigraph by relabelling autonomous flow as human, bundle by bundle.
/// The result dominates mixed.flow.x_h entrywise. The path set must contain
/// every combination of the bundle links it uses.
Vector construct_baseline_from_mixed(const Network& network, const IncidenceMatrix& delta,
                                     const EquilibriumResult& mixed);

struct DeteriorationHypotheses {
  bool linear_costs = false;
  bool delta_v_independent = false;
  bool q_unique = false;
  bool q_off_support = false;
  bool strict_off_support_costs = false;

  bool all() const {
    return linear_costs && delta_v_independent && q_unique && q_off_support &&
           strict_off_support_costs;
  }
};

enum class DeteriorationVerdict {
  deteriorates_for_small_alpha,
  predicts_improvement_direction,
  hypotheses_not_met,
};

const char* to_string(DeteriorationVerdict verdict);

struct DeteriorationReport {
  std::vector<std::size_t> v;
  std::optional<std::size_t> q;
  /// Present only when M_V is invertible.
  std::optional<double> gamma;
  /// C_q^H - lambda~ + gamma; the slope of S at alpha = 0+ when the
  /// hypotheses hold.
  std::optional<double> condition_value;
  DeteriorationHypotheses hypotheses;
  DeteriorationVerdict verdict = DeteriorationVerdict::hypotheses_not_met;
  /// Largest alpha for which the perturbed flow x_V^H = x~_V + alpha d,
  /// x^A = alpha e_q stays an equilibrium. A hint for the constructed flow,
  /// not a proven bound on the deterioration interval.
  std::optional<double> alpha_validity_hint;
};

/// Throws RequiresLinearCosts unless every link has n = 1.
DeteriorationReport deterioration_report(const Network& network, const IncidenceMatrix& delta,
                                         const ExactEquilibrium& baseline);

struct NoEffectResult {
  bool holds = false;
  std::optional<double> b0;
};

/// Equal free-flow path costs (Delta^T b constant within 1e-10).
NoEffectResult check_no_effect(const Network& network, const IncidenceMatrix& delta);

struct CentralizedComparison {
  double social_decentralized = 0.0;
  double social_centralized = 0.0;
  double deviation = 0.0;
  bool converged = false;
};

/// Decentralized equilibrium (solve_mixed) against the centralized fixed
/// point where a planner routes all autonomous demand to minimize S given
/// the human flow. The planner step uses projected gradient with a
/// Frank-Wolfe duality-gap certificate.
CentralizedComparison compare_centralized(const Network& network, const IncidenceMatrix& delta,
                                          double alpha, const SolverConfig& cfg);

struct ImprovementCertificate {
  bool holds = false;
  Vector baseline_x;
  Vector mixed_x_h;
  double social_mixed = 0.0;
  double social_baseline = 0.0;
};

struct AnalysisVerdict {
  double alpha = 0.0;
  std::optional<ImprovementCertificate> improvement;
  NoEffectResult no_effect;
  std::optional<DeteriorationReport> deterioration;
  std::optional<CentralizedComparison> centralized;
  /// Checks that did not run, with the unmet precondition.
  std::vector<std::string> skipped;
};

/// Runs every check whose preconditions the instance meets.
AnalysisVerdict analyze(const Network& network, const IncidenceMatrix& delta, double alpha,
                        const SolverConfig& cfg);

}  // namespace mixeq
