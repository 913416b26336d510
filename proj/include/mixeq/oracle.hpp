#pragma once

#include <cstddef>
#include <vector>

#include "mixeq/solver.hpp"

namespace mixeq {

/// Path indices used by each class.
struct SupportPair {
  std::vector<std::size_t> human;
  std::vector<std::size_t> autonomous;
};

/// Equilibrium of a linear-cost instance obtained by support enumeration.
struct ExactEquilibrium {
  double alpha = 0.0;
  Vector x_agg;
  double lambda_h = 0.0;
  double lambda_a = 0.0;
  SupportPair support;
  /// One feasible class decomposition of x_agg respecting the supports.
  Vector x_h;
  Vector x_a;
  double social = 0.0;
  /// Number of candidate supports examined before acceptance.
  std::size_t candidates_tried = 0;

  FlowPattern flow(const IncidenceMatrix& delta) const {
    return FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
  }
};

inline constexpr std::size_t kMaxOraclePaths = 20;
/// Cost equalities and inequalities are accepted with this absolute slack.
inline constexpr double kOracleCostSlack = 1e-9;

/// Baseline (all-human) equilibrium. For supports with independent columns
/// the closed form lambda = (1 + 1^T M^-1 D^T b) / (1^T M^-1 1) is used;
/// other supports go through a minimum-norm least-squares solve and are
/// verified afterwards. Requires n = 1 on every link and at most 20 paths.
ExactEquilibrium exact_baseline(const Network& network, const IncidenceMatrix& delta);

/// Mixed equilibrium by enumeration of (human, autonomous) support pairs,
/// ordered by total size, then human-support size, then lexicographically.
ExactEquilibrium exact_mixed(const Network& network, const IncidenceMatrix& delta, double alpha);

struct GridResult {
  FlowPattern flow;
  double gap = 0.0;
  std::size_t evaluated = 0;
};

inline constexpr std::size_t kMaxGridEvaluations = 20'000'000;

/// Brute-force minimizer of vi_gap over a simplex grid of (x_h, x_a) with
/// `grid_steps` subdivisions per class. Works for any exponent.
GridResult grid_gap_oracle(const Network& network, const IncidenceMatrix& delta, double alpha,
                           int grid_steps);

}  // namespace mixeq
