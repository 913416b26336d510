#include "mixeq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mixeq/error.hpp"

namespace mixeq {

bool check_improvement(const Vector& baseline_x, const Vector& mixed_x_h) {
  if (baseline_x.size() != mixed_x_h.size()) {
    throw Error(Errc::dimension_mismatch, "path flow vectors differ in length");
  }
  for (Eigen::Index p = 0; p < baseline_x.size(); ++p) {
    if (mixed_x_h(p) > baseline_x(p) + 1e-10) return false;
  }
  return true;
}

namespace {

constexpr double kBisectionTol = 1e-12;
constexpr double kCostTie = 1e-9;

// Reconstruction on one bundle of parallel links. `x` holds the aggregated link
// flows and is rewritten in place into a baseline equilibrium.
void relabel_bundle(const std::vector<CostParams>& cost, std::vector<double>& x,
                    const std::vector<bool>& human_used, const std::vector<bool>& auto_used) {
  const std::size_t n = x.size();
  auto t = [&](std::size_t j) { return travel_time(cost[j], x[j]); };

  double lambda = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) lambda = std::min(lambda, t(j));
  std::vector<bool> in_h(n, false);
  std::vector<bool> in_a = auto_used;
  for (std::size_t j = 0; j < n; ++j) {
    in_h[j] = human_used[j] || t(j) <= lambda + kCostTie;
  }

  // h(level) = extra flow the human set absorbs when its cost rises to level.
  auto absorbed = [&](double level) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_h[j]) total += std::max(0.0, inverse_travel_time(cost[j], level) - x[j]);
    }
    return total;
  };
  // Smallest level in [lo, inf) with pred(level) true, pred monotone.
  auto bisect = [&](double lo, auto pred) {
    double step = std::max(1.0, std::abs(lo));
    double hi = lo + step;
    while (!pred(hi)) {
      lo = hi;
      step *= 2.0;
      hi = lo + step;
    }
    while (hi - lo > kBisectionTol * std::max(1.0, std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (pred(mid) ? hi : lo) = mid;
    }
    return hi;
  };

  for (std::size_t guard = 0; guard < 4 * n + 4; ++guard) {
    std::optional<std::size_t> q;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_a[j] && (!q || t(j) < t(*q))) q = j;
    }
    if (!q) return;
    const std::size_t qi = *q;
    if (t(qi) <= lambda + kCostTie) {
      in_h[qi] = true;
      in_a[qi] = false;
      continue;
    }

    const double stock = x[qi];
    double next = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_h[j] && j != qi) next = std::min(next, t(j));
    }
    const double drain = bisect(lambda, [&](double level) { return absorbed(level) >= stock; });
    const double meet = bisect(lambda, [&](double level) {
      return travel_time(cost[qi], std::max(0.0, stock - absorbed(level))) <= level;
    });
    const double level = std::min({drain, next, meet});

    double moved = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_h[j]) continue;
      const double target = inverse_travel_time(cost[j], level);
      if (target > x[j]) {
        moved += target - x[j];
        x[j] = target;
      }
    }
    if (moved >= stock || level == drain) {
      // Bisection overshoot or leftover of order 1e-12 goes back to the
      // first human link so demand is conserved exactly.
      const double leftover = stock - moved;
      x[qi] = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_h[j]) {
          x[j] += leftover;
          break;
        }
      }
      in_a[qi] = false;
    } else {
      x[qi] = stock - moved;
    }
    lambda = level;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_h[j] && t(j) <= lambda + kCostTie) in_h[j] = true;
    }
  }
  throw Error(Errc::degenerate_system, "bundle relabelling did not terminate");
}

}  // namespace

Vector construct_baseline_from_mixed(const Network& network, const IncidenceMatrix& delta,
                                     const EquilibriumResult& mixed) {
  const auto P = static_cast<std::size_t>(delta.paths());
  const FlowPattern& flow = mixed.flow;
  if (static_cast<std::size_t>(flow.x_h.size()) != P ||
      static_cast<std::size_t>(flow.x_a.size()) != P) {
    throw Error(Errc::dimension_mismatch, "mixed flow does not match the path set");
  }
  const auto chain = bundle_chain(network);
  if (!chain) throw Error(Errc::not_path_multigraph, "network is not a path multigraph");

  const std::size_t nb = chain->bundles.size();
  std::vector<std::optional<std::size_t>> bundle_of(network.link_count());
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t a : chain->bundles[i]) bundle_of[a] = i;
  }

  // Each path picks one link per bundle; record which links the path set uses.
  std::map<std::vector<std::size_t>, std::size_t> path_of_combo;
  std::vector<std::vector<std::size_t>> used(nb);
  for (std::size_t p = 0; p < P; ++p) {
    std::vector<std::size_t> combo(nb, network.link_count());
    for (std::size_t a = 0; a < network.link_count(); ++a) {
      if (delta.delta(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p)) == 0.0) continue;
      if (!bundle_of[a] || combo[*bundle_of[a]] != network.link_count()) {
        throw Error(Errc::not_path_multigraph, "path " + std::to_string(p + 1) +
                                                   " does not take exactly one link per bundle");
      }
      combo[*bundle_of[a]] = a;
    }
    for (std::size_t i = 0; i < nb; ++i) {
      if (combo[i] == network.link_count()) {
        throw Error(Errc::not_path_multigraph,
                    "path " + std::to_string(p + 1) + " skips a bundle");
      }
      if (std::find(used[i].begin(), used[i].end(), combo[i]) == used[i].end()) {
        used[i].push_back(combo[i]);
      }
    }
    path_of_combo.emplace(combo, p);
  }
  std::size_t product = 1;
  for (const auto& u : used) product *= u.size();
  if (product != P || path_of_combo.size() != P) {
    throw Error(Errc::not_path_multigraph,
                "path set is not the full product of its bundle links");
  }

  Vector target = flow.f;
  for (std::size_t i = 0; i < nb; ++i) {
    std::sort(used[i].begin(), used[i].end());
    std::vector<CostParams> cost;
    std::vector<double> x;
    std::vector<bool> human_used;
    std::vector<bool> auto_used;
    for (std::size_t a : used[i]) {
      const auto ai = static_cast<Eigen::Index>(a);
      cost.push_back(network.link(a).cost);
      x.push_back(flow.f(ai));
      human_used.push_back(flow.f_h(ai) > kUsedPathThreshold);
      auto_used.push_back(flow.f_a(ai) > kUsedPathThreshold);
    }
    relabel_bundle(cost, x, human_used, auto_used);
    for (std::size_t j = 0; j < used[i].size(); ++j) {
      target(static_cast<Eigen::Index>(used[i][j])) = x[j];
    }
  }

  // Route the extra link flow target - f_h along product paths greedily and
  // add it on top of the human path flow.
  std::vector<std::vector<double>> residual(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t a : used[i]) {
      const auto ai = static_cast<Eigen::Index>(a);
      residual[i].push_back(std::max(0.0, target(ai) - flow.f_h(ai)));
    }
  }
  Vector out = flow.x_h;
  while (true) {
    std::vector<std::size_t> pick(nb);
    double amount = std::numeric_limits<double>::infinity();
    bool done = false;
    for (std::size_t i = 0; i < nb && !done; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < residual[i].size(); ++j) {
        if (residual[i][j] > residual[i][best]) best = j;
      }
      if (residual[i][best] <= 0.0) done = true;
      pick[i] = best;
      amount = std::min(amount, residual[i][best]);
    }
    if (done || amount <= 1e-15) break;
    std::vector<std::size_t> combo(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      combo[i] = used[i][pick[i]];
      residual[i][pick[i]] -= amount;
    }
    out(static_cast<Eigen::Index>(path_of_combo.at(combo))) += amount;
  }
  return out;
}

const char* to_string(DeteriorationVerdict verdict) {
  switch (verdict) {
    case DeteriorationVerdict::deteriorates_for_small_alpha:
      return "deteriorates_for_small_alpha";
    case DeteriorationVerdict::predicts_improvement_direction:
      return "predicts_improvement_direction";
    case DeteriorationVerdict::hypotheses_not_met:
      return "hypotheses_not_met";
  }
  return "unknown";
}

DeteriorationReport deterioration_report(const Network& network, const IncidenceMatrix& delta,
                                         const ExactEquilibrium& baseline) {
  if (!all_links_linear(network)) {
    throw Error(Errc::requires_linear_costs, "deterioration analysis needs n = 1 on every link");
  }
  const Eigen::Index P = delta.paths();
  if (baseline.x_agg.size() != P) {
    throw Error(Errc::dimension_mismatch, "baseline does not match the path set");
  }
  DeteriorationReport report;
  report.hypotheses.linear_costs = true;

  const Vector& x = baseline.x_agg;
  for (Eigen::Index p = 0; p < P; ++p) {
    if (x(p) > kUsedPathThreshold) report.v.push_back(static_cast<std::size_t>(p));
  }
  if (report.v.empty()) throw Error(Errc::empty_support, "baseline carries no flow");
  auto in_v = [&](Eigen::Index p) {
    return std::binary_search(report.v.begin(), report.v.end(), static_cast<std::size_t>(p));
  };

  const Vector f = delta.delta * x;
  const PathCosts cost = path_costs(network, delta, f);
  const double lambda = baseline.lambda_h;

  Eigen::Index q = 0;
  for (Eigen::Index p = 1; p < P; ++p) {
    if (cost.autonomous(p) < cost.autonomous(q)) q = p;
  }
  report.q = static_cast<std::size_t>(q);
  double runner_up = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < P; ++p) {
    if (p != q) runner_up = std::min(runner_up, cost.autonomous(p));
  }
  report.hypotheses.q_unique = runner_up - cost.autonomous(q) > kUniquenessMargin;
  report.hypotheses.q_off_support = !in_v(q);
  report.hypotheses.strict_off_support_costs = true;
  for (Eigen::Index p = 0; p < P; ++p) {
    if (!in_v(p) && !(cost.human(p) > lambda + kCostTie)) {
      report.hypotheses.strict_off_support_costs = false;
    }
  }

  const Matrix delta_v = delta.columns(report.v);
  report.hypotheses.delta_v_independent = columns_independent(delta_v);
  if (!report.hypotheses.delta_v_independent) return report;

  Vector k(delta.links());
  for (Eigen::Index a = 0; a < k.size(); ++a) {
    k(a) = network.link(static_cast<std::size_t>(a)).cost.k;
  }
  const Matrix M = delta_v.transpose() * k.asDiagonal() * delta_v;
  const Eigen::LDLT<Matrix> ldlt(M);
  const Vector ones = Vector::Ones(M.rows());
  // w = Delta_V^T K Delta e_q: coupling of the injected autonomous flow.
  const Vector w = delta_v.transpose() * k.asDiagonal() * delta.delta.col(q);
  const Vector m_ones = ldlt.solve(ones);
  const Vector m_w = ldlt.solve(w);
  const double gamma = (m_w.sum() - 1.0) / m_ones.sum();
  report.gamma = gamma;
  report.condition_value = cost.human(q) - lambda + gamma;

  if (!report.hypotheses.all()) return report;
  report.verdict = *report.condition_value > 0.0
                       ? DeteriorationVerdict::deteriorates_for_small_alpha
                       : DeteriorationVerdict::predicts_improvement_direction;

  // Perturbed flow: x_V^H = x~_V + alpha d, x^A = alpha e_q. Every path cost
  // moves linearly in alpha with rate r = Delta^T K (Delta_V d + Delta e_q).
  const Vector d = gamma * m_ones - m_w;
  const Vector r = delta.delta.transpose() * k.asDiagonal() *
                   (delta_v * d + delta.delta.col(q));
  auto valid = [&](double alpha) {
    for (std::size_t i = 0; i < report.v.size(); ++i) {
      const auto p = static_cast<Eigen::Index>(report.v[i]);
      if (x(p) + alpha * d(static_cast<Eigen::Index>(i)) < 0.0) return false;
    }
    const double lambda_h = lambda + alpha * gamma;
    const double auto_q = cost.autonomous(q) + 2.0 * alpha * r(q);
    for (Eigen::Index p = 0; p < P; ++p) {
      if (!in_v(p) && cost.human(p) + alpha * r(p) < lambda_h) return false;
      if (cost.autonomous(p) + 2.0 * alpha * r(p) < auto_q) return false;
    }
    return true;
  };
  if (valid(1.0)) {
    report.alpha_validity_hint = 1.0;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (valid(mid) ? lo : hi) = mid;
    }
    report.alpha_validity_hint = lo;
  }
  return report;
}

NoEffectResult check_no_effect(const Network& network, const IncidenceMatrix& delta) {
  NoEffectResult result;
  const Vector b = free_flow_path_costs(network, delta);
  if (b.size() == 0) return result;
  if (b.maxCoeff() - b.minCoeff() <= 1e-10) {
    result.holds = true;
    result.b0 = b(0);
  }
  return result;
}

namespace {

// Euclidean projection onto {y >= 0, sum y = total}.
Vector project_simplex(const Vector& v, double total) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double shift = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    running += sorted[i];
    const double candidate = (running - total) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) shift = candidate;
  }
  return (v.array() - shift).max(0.0).matrix();
}

struct PlannerResult {
  Vector x;
  bool certified = false;
};

// Minimizes S(f_h + Delta x) over x >= 0, sum x = demand.
PlannerResult plan_autonomous(const Network& network, const IncidenceMatrix& delta,
                              const Vector& f_h, double demand, const Vector& start,
                              const SolverConfig& cfg) {
  PlannerResult out;
  Vector x = start;
  const double tol = cfg.effective_inner_tol();
  double step = 1.0;
  int stalled = 0;
  auto objective = [&](const Vector& y) { return social_cost(network, f_h + delta.delta * y); };
  for (int it = 0; it < cfg.max_inner && stalled < 3; ++it) {
    const Vector f = f_h + delta.delta * x;
    const Vector grad = delta.delta.transpose() * autonomous_link_costs(network, f);
    const double value = social_cost(network, f);
    const double certificate = x.dot(grad) - demand * grad.minCoeff();
    if (certificate <= tol * value) {
      out.certified = true;
      break;
    }
    step *= 2.0;
    while (true) {
      const Vector trial = project_simplex(x - step * grad, demand);
      const Vector move = trial - x;
      const double trial_value = objective(trial);
      if (trial_value <= value + grad.dot(move) + move.squaredNorm() / (2.0 * step)) {
        // Roundoff floor: the certificate can sit above a very tight tolerance.
        stalled = trial_value < value ? 0 : stalled + 1;
        x = trial;
        break;
      }
      step *= 0.5;
      if (step < 1e-300) break;
    }
    if (step < 1e-300) break;
  }
  out.x = std::move(x);
  if (!out.certified) {
    // Projected gradient stalled: finish with Frank-Wolfe from its iterate.
    const InnerResult polish = frank_wolfe_auto(network, delta, f_h, demand, cfg, &out.x);
    out.x = polish.x;
    out.certified = polish.converged;
  }
  return out;
}

}  // namespace

CentralizedComparison compare_centralized(const Network& network, const IncidenceMatrix& delta,
                                          double alpha, const SolverConfig& cfg) {
  SolverConfig run = cfg;
  run.alpha = alpha;
  run.validate();
  const EquilibriumResult decentralized = solve_mixed(network, delta, run);

  const double human_demand = 1.0 - alpha;
  const Vector free_flow = human_link_costs(network, Vector::Zero(delta.links()));
  Vector x_h = all_or_nothing(delta, free_flow, human_demand);
  Vector x_a = all_or_nothing(delta, free_flow, alpha);
  bool converged = false;
  FlowPattern flow = FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
  for (int outer = 0; outer < run.max_outer; ++outer) {
    if (human_demand > 0.0) {
      x_h = frank_wolfe_human(network, delta, flow.f_a, human_demand, run, &x_h).x;
      flow = FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
    }
    if (alpha > 0.0) {
      x_a = plan_autonomous(network, delta, flow.f_h, alpha, x_a, run).x;
      flow = FlowPattern::from_path_flows(delta, alpha, x_h, x_a);
    }
    if (vi_gap(network, delta, flow) <= run.outer_tol * social_cost(network, flow.f)) {
      converged = true;
      break;
    }
  }

  CentralizedComparison out;
  out.social_decentralized = decentralized.social;
  out.social_centralized = social_cost(network, flow.f);
  out.deviation = std::abs(out.social_decentralized - out.social_centralized);
  out.converged = converged && decentralized.converged;
  return out;
}

AnalysisVerdict analyze(const Network& network, const IncidenceMatrix& delta, double alpha,
                        const SolverConfig& cfg) {
  AnalysisVerdict verdict;
  verdict.alpha = alpha;
  verdict.no_effect = check_no_effect(network, delta);

  SolverConfig run = cfg;
  run.alpha = alpha;
  run.validate();
  const EquilibriumResult mixed = solve_mixed(network, delta, run);

  if (!bundle_chain(network)) {
    verdict.skipped.push_back("improvement certificate: network is not a path multigraph");
  } else {
    try {
      ImprovementCertificate cert;
      cert.baseline_x = construct_baseline_from_mixed(network, delta, mixed);
      cert.mixed_x_h = mixed.flow.x_h;
      cert.holds = check_improvement(cert.baseline_x, cert.mixed_x_h);
      cert.social_mixed = mixed.social;
      cert.social_baseline = social_cost(network, delta.delta * cert.baseline_x);
      verdict.improvement = std::move(cert);
    } catch (const Error& e) {
      verdict.skipped.push_back(std::string("improvement certificate: ") + e.what());
    }
  }

  if (!all_links_linear(network)) {
    verdict.skipped.push_back("deterioration: requires n = 1 on every link");
  } else if (static_cast<std::size_t>(delta.paths()) > kMaxOraclePaths) {
    verdict.skipped.push_back("deterioration: exact baseline limited to " +
                              std::to_string(kMaxOraclePaths) + " paths");
  } else {
    verdict.deterioration = deterioration_report(network, delta, exact_baseline(network, delta));
  }

  verdict.centralized = compare_centralized(network, delta, alpha, cfg);
  return verdict;
}

}  // namespace mixeq
