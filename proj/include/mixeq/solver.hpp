#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mixeq/costs.hpp"
#include "mixeq/netmodel.hpp"

namespace mixeq {

enum class InitMode {
  free_flow,          // both classes all-or-nothing on free-flow costs (default)
  all_on_first_path,  // both classes entirely on path 0
  uniform,            // each class spread evenly over all paths
  given,              // SolverConfig::given_x_h / given_x_a
};

enum class InnerMethod {
  pairwise,  // moves mass from the costliest used path to the all-or-nothing target
  classic,   // convex combination with the all-or-nothing vertex
};

struct SolverConfig {
  double alpha = 0.0;
  /// Outer stop: vi_gap / social_cost <= outer_tol.
  double outer_tol = 1e-8;
  /// Inner stop: class duality gap / social_cost <= inner_tol. Inner solves
  /// never run looser than outer_tol / 100.
  double inner_tol = 1e-10;
  int max_outer = 1000;
  int max_inner = 100000;
  InitMode init = InitMode::free_flow;
  InnerMethod inner_method = InnerMethod::pairwise;
  Vector given_x_h;
  Vector given_x_a;
  /// Keep the inner objective value after every inner iteration.
  bool record_objective = false;

  void validate() const;
  double effective_inner_tol() const;
};

/// Feasible two-class path flow with the induced link flows.
struct FlowPattern {
  double alpha = 0.0;
  Vector x_h;
  Vector x_a;
  Vector f_h;
  Vector f_a;
  Vector f;

  static FlowPattern from_path_flows(const IncidenceMatrix& delta, double alpha, Vector x_h,
                                     Vector x_a);

  Vector x() const { return x_h + x_a; }
};

struct InnerResult {
  Vector x;
  double gap = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective;
};

struct EquilibriumResult {
  FlowPattern flow;
  double lambda_h = 0.0;
  double lambda_a = 0.0;
  double social = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Links use different exponents; uniqueness of the aggregate flow is
  /// then not covered by the single-exponent theory.
  bool mixed_exponents = false;
};

/// All demand on the cheapest path under Delta^T link_costs (lowest index on ties).
Vector all_or_nothing(const IncidenceMatrix& delta, const Vector& link_costs, double demand);

/// Human best response to a frozen autonomous link flow: minimizes the
/// Beckmann potential over the human simplex. `start` (optional) must be
/// feasible for `demand`; otherwise starts from all-or-nothing.
InnerResult frank_wolfe_human(const Network& network, const IncidenceMatrix& delta,
                              const Vector& f_a_fixed, double demand, const SolverConfig& cfg,
                              const Vector* start = nullptr);

/// Autonomous best response to a frozen human link flow: minimizes the
/// social cost over the autonomous simplex.
InnerResult frank_wolfe_auto(const Network& network, const IncidenceMatrix& delta,
                             const Vector& f_h_fixed, double demand, const SolverConfig& cfg,
                             const Vector* start = nullptr);

/// Gauss-Seidel relaxation: human step with autonomous flow fixed, then the
/// autonomous step with human flow fixed, until the VI gap is small.
/// Non-convergence is reported through `converged`, never thrown.
EquilibriumResult solve_mixed(const Network& network, const IncidenceMatrix& delta,
                              const SolverConfig& cfg);

/// c^H(f).f_h - (1-alpha) min_p C^H_p + c^A(f).f_a - alpha min_p C^A_p.
/// Throws InfeasibleFlow when demand or sign constraints are off by more than 1e-9.
double vi_gap(const Network& network, const IncidenceMatrix& delta, const FlowPattern& flow);

/// Evaluates lambda_h, lambda_a, social cost and gap of an arbitrary feasible flow.
EquilibriumResult evaluate_flow(const Network& network, const IncidenceMatrix& delta,
                                FlowPattern flow);

struct UniquenessReport {
  double max_f_deviation = 0.0;
  double max_s_deviation = 0.0;
  int converged_runs = 0;
  int excluded_runs = 0;
};

/// Solves from `n_starts` seeded random feasible starts and reports how far
/// the aggregated link flows and social costs of converged runs spread.
UniquenessReport multi_start_uniqueness_check(const Network& network,
                                              const IncidenceMatrix& delta,
                                              const SolverConfig& cfg, int n_starts,
                                              std::uint64_t seed);

/// Random point of the simplex scaled to `demand` (normalized independent
/// uniform draws).
Vector random_simplex_point(std::size_t dimension, double demand, std::mt19937_64& rng);

}  // namespace mixeq
