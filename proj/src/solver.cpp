#include "mixeq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixeq/error.hpp"

namespace mixeq {

namespace {

constexpr double kFeasibilitySlack = 1e-9;
constexpr int kBisectionSteps = 80;

enum class Perceived { human, autonomous };

double link_cost(Perceived who, const CostParams& cost, double flow) {
  return who == Perceived::human ? travel_time(cost, flow) : marginal_cost(cost, flow);
}

double link_cost_slope(Perceived who, const CostParams& cost, double flow) {
  return who == Perceived::human ? travel_time_slope(cost, flow)
                                 : marginal_cost_slope(cost, flow);
}

Vector perceived_link_costs(const Network& network, Perceived who, const Vector& f) {
  return who == Perceived::human ? human_link_costs(network, f)
                                 : autonomous_link_costs(network, f);
}

Eigen::Index argmin_lowest(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) < v(best)) best = i;
  }
  return best;
}

// Exact minimization of s -> objective(f + s * dir) on [0, s_max] through
// its derivative sum_a dir_a * cost_a(f_a + s dir_a), which is increasing.
double line_search(const Network& network, Perceived who, const Vector& f, const Vector& dir,
                   double s_max, int iteration) {
  std::vector<Eigen::Index> support;
  bool linear = true;
  for (Eigen::Index a = 0; a < dir.size(); ++a) {
    if (dir(a) == 0.0) continue;
    support.push_back(a);
    if (!network.link(static_cast<std::size_t>(a)).cost.is_linear()) linear = false;
  }
  auto derivative = [&](double s) {
    double d = 0.0;
    for (Eigen::Index a : support) {
      d += dir(a) * link_cost(who, network.link(static_cast<std::size_t>(a)).cost, f(a) + s * dir(a));
    }
    return d;
  };
  const double d0 = derivative(0.0);
  if (!std::isfinite(d0)) return std::min(s_max, 2.0 / (iteration + 2.0));
  if (d0 >= 0.0) return 0.0;

  if (linear) {
    double curvature = 0.0;
    for (Eigen::Index a : support) {
      curvature += dir(a) * dir(a) *
                   link_cost_slope(who, network.link(static_cast<std::size_t>(a)).cost, 0.0);
    }
    if (!(curvature > 0.0)) return s_max;
    return std::clamp(-d0 / curvature, 0.0, s_max);
  }

  if (derivative(s_max) <= 0.0) return s_max;
  double lo = 0.0;
  double hi = s_max;
  for (int i = 0; i < kBisectionSteps && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = derivative(mid);
    if (!std::isfinite(d)) return std::min(s_max, 2.0 / (iteration + 2.0));
    (d < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double class_objective(const Network& network, Perceived who, const Vector& f_own,
                       const Vector& f_other) {
  return who == Perceived::human ? beckmann_human(network, f_own, f_other)
                                 : social_cost(network, f_own + f_other);
}

InnerResult frank_wolfe_class(const Network& network, const IncidenceMatrix& delta,
                              Perceived who, const Vector& f_other, double demand,
                              const SolverConfig& cfg, const Vector* start) {
  const Eigen::Index P = delta.paths();
  if (static_cast<std::size_t>(f_other.size()) != network.link_count() ||
      static_cast<std::size_t>(delta.links()) != network.link_count()) {
    throw Error(Errc::dimension_mismatch, "fixed link flow or incidence matrix has wrong size");
  }
  if (!(demand >= 0.0)) {
    throw Error(Errc::invalid_argument, "class demand must be >= 0");
  }
  InnerResult result;
  if (demand == 0.0) {
    result.x = Vector::Zero(P);
    result.converged = true;
    return result;
  }

  const double tol = cfg.effective_inner_tol();
  Vector x;
  if (start != nullptr && start->size() == P && start->minCoeff() >= 0.0 &&
      std::abs(start->sum() - demand) <= kFeasibilitySlack) {
    x = *start * (demand / start->sum());
  } else {
    x = all_or_nothing(delta, perceived_link_costs(network, who, f_other), demand);
  }

  for (int it = 0;; ++it) {
    const Vector f_own = delta.delta * x;
    const Vector f = f_own + f_other;
    const Vector path_cost = delta.delta.transpose() * perceived_link_costs(network, who, f);
    if (cfg.record_objective) {
      result.objective.push_back(class_objective(network, who, f_own, f_other));
    }
    const Eigen::Index best = argmin_lowest(path_cost);
    const double gap = std::max(0.0, x.dot(path_cost) - demand * path_cost(best));
    const double scale = social_cost(network, f);
    result.gap = gap;
    result.relative_gap = scale > 0.0 ? gap / scale : gap;
    result.iterations = it;
    if (result.relative_gap <= tol) {
      result.converged = true;
      break;
    }
    if (it >= cfg.max_inner) break;

    if (cfg.inner_method == InnerMethod::pairwise) {
      Eigen::Index away = -1;
      for (Eigen::Index p = 0; p < P; ++p) {
        if (x(p) > 0.0 && (away < 0 || path_cost(p) > path_cost(away))) away = p;
      }
      if (away < 0 || away == best) break;
      const Vector dir = delta.delta.col(best) - delta.delta.col(away);
      const double s_max = x(away);
      const double step = line_search(network, who, f, dir, s_max, it);
      // Zero step: cost difference lost in roundoff, nothing left to move.
      if (step <= 0.0) break;
      if (step >= s_max) {
        x(best) += s_max;
        x(away) = 0.0;
      } else {
        x(best) += step;
        x(away) -= step;
      }
    } else {
      const Vector target = Vector::Unit(P, best) * demand;
      const Vector dir = delta.delta * target - f_own;
      const double step = line_search(network, who, f, dir, 1.0, it);
      if (step <= 0.0) break;
      x = (1.0 - step) * x + step * target;
    }
  }
  result.x = std::move(x);
  return result;
}

Vector initial_flow(const Network& network, const IncidenceMatrix& delta, const SolverConfig& cfg,
                    double demand, const Vector& given) {
  const Eigen::Index P = delta.paths();
  switch (cfg.init) {
    case InitMode::free_flow:
      return all_or_nothing(delta, human_link_costs(network, Vector::Zero(delta.links())), demand);
    case InitMode::all_on_first_path:
      return Vector::Unit(P, 0) * demand;
    case InitMode::uniform:
      return Vector::Constant(P, demand / static_cast<double>(P));
    case InitMode::given: {
      if (given.size() != P) {
        throw Error(Errc::dimension_mismatch, "given initial path flow has wrong length");
      }
      if (given.minCoeff() < 0.0 || std::abs(given.sum() - demand) > kFeasibilitySlack) {
        throw Error(Errc::infeasible_flow, "given initial path flow is not feasible");
      }
      if (demand == 0.0) return Vector::Zero(P);
      return given * (demand / given.sum());
    }
  }
  return Vector::Zero(P);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(Errc::invalid_argument, "alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) {
    throw Error(Errc::invalid_argument, "tolerances must be > 0");
  }
  if (max_outer < 1 || max_inner < 1) {
    throw Error(Errc::invalid_argument, "iteration caps must be >= 1");
  }
}

double SolverConfig::effective_inner_tol() const { return std::min(inner_tol, 0.01 * outer_tol); }

FlowPattern FlowPattern::from_path_flows(const IncidenceMatrix& delta, double alpha, Vector x_h,
                                         Vector x_a) {
  if (x_h.size() != delta.paths() || x_a.size() != delta.paths()) {
    throw Error(Errc::dimension_mismatch, "path flow length does not match the path set");
  }
  FlowPattern flow;
  flow.alpha = alpha;
  flow.f_h = delta.delta * x_h;
  flow.f_a = delta.delta * x_a;
  flow.f = flow.f_h + flow.f_a;
  flow.x_h = std::move(x_h);
  flow.x_a = std::move(x_a);
  return flow;
}

Vector all_or_nothing(const IncidenceMatrix& delta, const Vector& link_costs, double demand) {
  if (link_costs.size() != delta.links()) {
    throw Error(Errc::dimension_mismatch, "link cost vector does not match the incidence matrix");
  }
  if (delta.paths() == 0) {
    throw Error(Errc::no_path_exists, "empty path set");
  }
  const Vector path_cost = delta.delta.transpose() * link_costs;
  return Vector::Unit(delta.paths(), argmin_lowest(path_cost)) * demand;
}

InnerResult frank_wolfe_human(const Network& network, const IncidenceMatrix& delta,
                              const Vector& f_a_fixed, double demand, const SolverConfig& cfg,
                              const Vector* start) {
  return frank_wolfe_class(network, delta, Perceived::human, f_a_fixed, demand, cfg, start);
}

InnerResult frank_wolfe_auto(const Network& network, const IncidenceMatrix& delta,
                             const Vector& f_h_fixed, double demand, const SolverConfig& cfg,
                             const Vector* start) {
  return frank_wolfe_class(network, delta, Perceived::autonomous, f_h_fixed, demand, cfg, start);
}

double vi_gap(const Network& network, const IncidenceMatrix& delta, const FlowPattern& flow) {
  const double alpha = flow.alpha;
  if (flow.x_h.size() != delta.paths() || flow.x_a.size() != delta.paths()) {
    throw Error(Errc::dimension_mismatch, "flow pattern does not match the path set");
  }
  if (std::abs(flow.x_h.sum() - (1.0 - alpha)) > kFeasibilitySlack ||
      std::abs(flow.x_a.sum() - alpha) > kFeasibilitySlack ||
      (flow.x_h.size() > 0 &&
       std::min(flow.x_h.minCoeff(), flow.x_a.minCoeff()) < -kFeasibilitySlack)) {
    throw Error(Errc::infeasible_flow, "path flows violate the class demands or nonnegativity");
  }
  const ClassCosts link = class_costs(network, flow.f);
  const Vector human_path = delta.delta.transpose() * link.human;
  const Vector auto_path = delta.delta.transpose() * link.autonomous;
  const double gap = link.human.dot(flow.f_h) - (1.0 - alpha) * human_path.minCoeff() +
                     link.autonomous.dot(flow.f_a) - alpha * auto_path.minCoeff();
  return std::max(0.0, gap);
}

EquilibriumResult evaluate_flow(const Network& network, const IncidenceMatrix& delta,
                                FlowPattern flow) {
  EquilibriumResult result;
  const PathCosts costs = path_costs(network, delta, flow.f);
  result.lambda_h = costs.human.minCoeff();
  result.lambda_a = costs.autonomous.minCoeff();
  result.social = social_cost(network, flow.f);
  result.gap = vi_gap(network, delta, flow);
  result.relative_gap = result.social > 0.0 ? result.gap / result.social : result.gap;
  result.mixed_exponents = !single_exponent(network);
  result.flow = std::move(flow);
  return result;
}

EquilibriumResult solve_mixed(const Network& network, const IncidenceMatrix& delta,
                              const SolverConfig& cfg) {
  cfg.validate();
  if (delta.paths() == 0) {
    throw Error(Errc::no_path_exists, "empty path set");
  }
  const double alpha = cfg.alpha;
  const double human_demand = 1.0 - alpha;
  Vector x_h = initial_flow(network, delta, cfg, human_demand, cfg.given_x_h);
  Vector x_a = initial_flow(network, delta, cfg, alpha, cfg.given_x_a);

  FlowPattern flow = FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
  int outer = 0;
  bool converged = false;
  while (outer < cfg.max_outer) {
    ++outer;
    if (human_demand > 0.0) {
      x_h = frank_wolfe_human(network, delta, flow.f_a, human_demand, cfg, &x_h).x;
      flow = FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
    }
    if (alpha > 0.0) {
      x_a = frank_wolfe_auto(network, delta, flow.f_h, alpha, cfg, &x_a).x;
      flow = FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
    }
    const double gap = vi_gap(network, delta, flow);
    const double social = social_cost(network, flow.f);
    if (gap <= cfg.outer_tol * social) {
      converged = true;
      break;
    }
  }

  EquilibriumResult result = evaluate_flow(network, delta, std::move(flow));
  result.iterations = outer;
  result.converged = converged;
  return result;
}

Vector random_simplex_point(std::size_t dimension, double demand, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dimension));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(rng);
  double total = v.sum();
  if (!(total > 0.0)) {
    v.setOnes();
    total = v.sum();
  }
  return v * (demand / total);
}

UniquenessReport multi_start_uniqueness_check(const Network& network,
                                              const IncidenceMatrix& delta,
                                              const SolverConfig& cfg, int n_starts,
                                              std::uint64_t seed) {
  if (!single_exponent(network)) {
    throw Error(Errc::invalid_argument, "uniqueness check requires a single cost exponent");
  }
  if (n_starts < 1) {
    throw Error(Errc::invalid_argument, "n_starts must be >= 1");
  }
  std::mt19937_64 rng(seed);
  const auto P = static_cast<std::size_t>(delta.paths());
  std::vector<EquilibriumResult> runs;
  UniquenessReport report;
  for (int s = 0; s < n_starts; ++s) {
    SolverConfig run_cfg = cfg;
    run_cfg.init = InitMode::given;
    run_cfg.given_x_h = random_simplex_point(P, 1.0 - cfg.alpha, rng);
    run_cfg.given_x_a = random_simplex_point(P, cfg.alpha, rng);
    EquilibriumResult r = solve_mixed(network, delta, run_cfg);
    if (r.converged) {
      runs.push_back(std::move(r));
    } else {
      ++report.excluded_runs;
    }
  }
  report.converged_runs = static_cast<int>(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      report.max_f_deviation =
          std::max(report.max_f_deviation,
                   (runs[i].flow.f - runs[j].flow.f).lpNorm<Eigen::Infinity>());
      report.max_s_deviation =
          std::max(report.max_s_deviation, std::abs(runs[i].social - runs[j].social));
    }
  }
  return report;
}

}  // namespace mixeq
