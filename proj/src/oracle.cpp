#include "mixeq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixeq/error.hpp"

namespace mixeq {

namespace {

constexpr double kNegativeClamp = 1e-12;

// Path-level algebra of linear costs: C^H = G x + c0, C^A = 2 G x + c0
// with G = Delta^T K Delta and c0 = Delta^T b.
struct LinearPathModel {
  Matrix G;
  Vector c0;

  LinearPathModel(const Network& network, const IncidenceMatrix& delta) {
    Vector k(delta.links());
    for (Eigen::Index a = 0; a < k.size(); ++a) {
      k(a) = network.link(static_cast<std::size_t>(a)).cost.k;
    }
    G = delta.delta.transpose() * k.asDiagonal() * delta.delta;
    c0 = free_flow_path_costs(network, delta);
  }

  Vector human(const Vector& x) const { return G * x + c0; }
  Vector autonomous(const Vector& x) const { return 2.0 * G * x + c0; }
};

void require_linear_small(const Network& network, const IncidenceMatrix& delta) {
  if (!all_links_linear(network)) {
    throw Error(Errc::requires_linear_costs, "exact oracle needs n = 1 on every link");
  }
  if (delta.paths() == 0) {
    throw Error(Errc::no_path_exists, "empty path set");
  }
  if (static_cast<std::size_t>(delta.paths()) > kMaxOraclePaths) {
    throw Error(Errc::invalid_argument, "exact oracle enumerates supports of at most " +
                                            std::to_string(kMaxOraclePaths) + " paths");
  }
}

// All subsets of {0..n-1} of each size, each size in lexicographic order.
std::vector<std::vector<std::vector<std::size_t>>> subsets_by_size(std::size_t n) {
  std::vector<std::vector<std::vector<std::size_t>>> out(n + 1);
  out[0].push_back({});
  for (std::size_t size = 1; size <= n; ++size) {
    std::vector<std::size_t> combo(size);
    for (std::size_t i = 0; i < size; ++i) combo[i] = i;
    while (true) {
      out[size].push_back(combo);
      std::size_t i = size;
      while (i > 0 && combo[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < size; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return out;
}

// Solves A y = r. Square nonsingular systems go through LU; anything else
// (rank deficient or overdetermined) through a minimum-norm least-squares
// step. The caller verifies the equilibrium conditions either way.
Vector solve_system(const Matrix& A, const Vector& r) {
  if (A.rows() == A.cols()) {
    Eigen::PartialPivLU<Matrix> lu(A);
    Vector y = lu.solve(r);
    if (y.allFinite() && (A * y - r).lpNorm<Eigen::Infinity>() <= 1e-10) return y;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  return cod.solve(r);
}

// Clamps roundoff negatives; false if a genuinely negative entry remains.
bool clamp_nonnegative(Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || x(i) < -kNegativeClamp) return false;
    if (x(i) < 0.0) x(i) = 0.0;
  }
  return true;
}

bool wardrop_holds(const Vector& cost, const std::vector<std::size_t>& support, double level) {
  for (std::size_t p : support) {
    if (std::abs(cost(static_cast<Eigen::Index>(p)) - level) > kOracleCostSlack) return false;
  }
  return cost.minCoeff() >= level - kOracleCostSlack;
}

double subset_sum(const Vector& x, const std::vector<std::size_t>& subset) {
  double total = 0.0;
  for (std::size_t p : subset) total += x(static_cast<Eigen::Index>(p));
  return total;
}

bool contains(const std::vector<std::size_t>& sorted, std::size_t value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

void finish(const Network& network, const IncidenceMatrix& delta, ExactEquilibrium& eq) {
  eq.social = social_cost(network, delta.delta * eq.x_agg);
}

}  // namespace

ExactEquilibrium exact_baseline(const Network& network, const IncidenceMatrix& delta) {
  require_linear_small(network, delta);
  const LinearPathModel model(network, delta);
  const auto P = static_cast<std::size_t>(delta.paths());
  const auto subsets = subsets_by_size(P);

  std::size_t tried = 0;
  for (std::size_t size = 1; size <= P; ++size) {
    for (const auto& support : subsets[size]) {
      ++tried;
      const auto V = static_cast<Eigen::Index>(size);
      Matrix M(V, V);
      Vector c0_v(V);
      for (Eigen::Index i = 0; i < V; ++i) {
        c0_v(i) = model.c0(static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)]));
        for (Eigen::Index j = 0; j < V; ++j) {
          M(i, j) = model.G(static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)]),
                            static_cast<Eigen::Index>(support[static_cast<std::size_t>(j)]));
        }
      }
      Vector x_v;
      double lambda = 0.0;
      if (columns_independent(delta.columns(support))) {
        const Eigen::LDLT<Matrix> ldlt(M);
        const Vector m_ones = ldlt.solve(Vector::Ones(V));
        const Vector m_c0 = ldlt.solve(c0_v);
        lambda = (1.0 + m_c0.sum()) / m_ones.sum();
        x_v = lambda * m_ones - m_c0;
      } else {
        Matrix A = Matrix::Zero(V + 1, V + 1);
        Vector r(V + 1);
        A.topLeftCorner(V, V) = M;
        A.topRightCorner(V, 1).setConstant(-1.0);
        A.bottomLeftCorner(1, V).setOnes();
        r.head(V) = -c0_v;
        r(V) = 1.0;
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
        const Vector y = cod.solve(r);
        x_v = y.head(V);
        lambda = y(V);
      }
      if (!clamp_nonnegative(x_v)) continue;
      Vector x = Vector::Zero(static_cast<Eigen::Index>(P));
      for (Eigen::Index i = 0; i < V; ++i) {
        x(static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)])) = x_v(i);
      }
      if (std::abs(x.sum() - 1.0) > kOracleCostSlack) continue;
      const Vector cost = model.human(x);
      if (!wardrop_holds(cost, support, lambda)) continue;

      ExactEquilibrium eq;
      eq.alpha = 0.0;
      eq.x_agg = x;
      eq.x_h = x;
      eq.x_a = Vector::Zero(x.size());
      eq.lambda_h = lambda;
      eq.lambda_a = model.autonomous(x).minCoeff();
      eq.support.human = support;
      eq.candidates_tried = tried;
      finish(network, delta, eq);
      return eq;
    }
  }
  throw Error(Errc::no_valid_support, "no support passed the baseline equilibrium checks after " +
                                          std::to_string(tried) + " candidates");
}

ExactEquilibrium exact_mixed(const Network& network, const IncidenceMatrix& delta, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(Errc::invalid_argument, "alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return exact_baseline(network, delta);
  require_linear_small(network, delta);

  const LinearPathModel model(network, delta);
  const auto P = static_cast<std::size_t>(delta.paths());
  const auto subsets = subsets_by_size(P);
  const bool has_h = alpha < 1.0;
  const std::size_t h_min = has_h ? 1 : 0;
  const std::size_t h_max = has_h ? P : 0;

  std::size_t tried = 0;
  std::vector<std::size_t> uni;
  for (std::size_t total = h_min + 1; total <= h_max + P; ++total) {
    for (std::size_t hs = h_min; hs <= std::min(h_max, total - 1); ++hs) {
      const std::size_t as = total - hs;
      if (as < 1 || as > P) continue;
      for (const auto& vh : subsets[hs]) {
        for (const auto& va : subsets[as]) {
          ++tried;
          uni.clear();
          std::set_union(vh.begin(), vh.end(), va.begin(), va.end(), std::back_inserter(uni));
          const bool disjoint = uni.size() == vh.size() + va.size();
          const auto u = static_cast<Eigen::Index>(uni.size());
          const Eigen::Index col_h = u;
          const Eigen::Index col_a = has_h ? u + 1 : u;
          const Eigen::Index cols = col_a + 1;
          const Eigen::Index rows = static_cast<Eigen::Index>(vh.size() + va.size()) + 1 +
                                    ((has_h && disjoint) ? 1 : 0);
          Matrix A = Matrix::Zero(rows, cols);
          Vector r = Vector::Zero(rows);
          Eigen::Index row = 0;
          for (std::size_t p : vh) {
            for (Eigen::Index j = 0; j < u; ++j) {
              A(row, j) = model.G(static_cast<Eigen::Index>(p),
                                  static_cast<Eigen::Index>(uni[static_cast<std::size_t>(j)]));
            }
            A(row, col_h) = -1.0;
            r(row) = -model.c0(static_cast<Eigen::Index>(p));
            ++row;
          }
          for (std::size_t p : va) {
            for (Eigen::Index j = 0; j < u; ++j) {
              A(row, j) = 2.0 * model.G(static_cast<Eigen::Index>(p),
                                        static_cast<Eigen::Index>(uni[static_cast<std::size_t>(j)]));
            }
            A(row, col_a) = -1.0;
            r(row) = -model.c0(static_cast<Eigen::Index>(p));
            ++row;
          }
          A.block(row, 0, 1, u).setOnes();
          r(row) = 1.0;
          ++row;
          if (has_h && disjoint) {
            for (Eigen::Index j = 0; j < u; ++j) {
              if (contains(vh, uni[static_cast<std::size_t>(j)])) A(row, j) = 1.0;
            }
            r(row) = 1.0 - alpha;
          }

          const Vector y = solve_system(A, r);
          Vector x_u = y.head(u);
          if (!clamp_nonnegative(x_u)) continue;
          Vector x = Vector::Zero(static_cast<Eigen::Index>(P));
          for (Eigen::Index j = 0; j < u; ++j) {
            x(static_cast<Eigen::Index>(uni[static_cast<std::size_t>(j)])) = x_u(j);
          }
          if (std::abs(x.sum() - 1.0) > kOracleCostSlack) continue;
          if (has_h && subset_sum(x, vh) < 1.0 - alpha - kOracleCostSlack) continue;
          if (subset_sum(x, va) < alpha - kOracleCostSlack) continue;

          const Vector human_cost = model.human(x);
          const Vector auto_cost = model.autonomous(x);
          const double lambda_h = has_h ? y(col_h) : human_cost.minCoeff();
          const double lambda_a = y(col_a);
          if (has_h && !wardrop_holds(human_cost, vh, lambda_h)) continue;
          if (!wardrop_holds(auto_cost, va, lambda_a)) continue;

          // Autonomous demand goes to autonomous-only paths first, then to
          // shared paths in index order.
          Vector x_a = Vector::Zero(x.size());
          double remaining = alpha;
          for (std::size_t p : va) {
            if (!contains(vh, p)) {
              x_a(static_cast<Eigen::Index>(p)) = x(static_cast<Eigen::Index>(p));
              remaining -= x(static_cast<Eigen::Index>(p));
            }
          }
          for (std::size_t p : va) {
            if (contains(vh, p) && remaining > 0.0) {
              const double take = std::min(remaining, x(static_cast<Eigen::Index>(p)));
              x_a(static_cast<Eigen::Index>(p)) = take;
              remaining -= take;
            }
          }
          if (std::abs(remaining) > kOracleCostSlack) continue;
          Vector x_h = (x - x_a).cwiseMax(0.0);

          ExactEquilibrium eq;
          eq.alpha = alpha;
          eq.x_agg = x;
          eq.x_h = std::move(x_h);
          eq.x_a = std::move(x_a);
          eq.lambda_h = lambda_h;
          eq.lambda_a = lambda_a;
          eq.support = {vh, va};
          eq.candidates_tried = tried;
          finish(network, delta, eq);
          return eq;
        }
      }
    }
  }
  throw Error(Errc::no_valid_support, "no support pair passed the mixed equilibrium checks after " +
                                          std::to_string(tried) + " candidates");
}

namespace {

// All compositions of `steps` into `parts` nonnegative integers.
std::vector<std::vector<int>> compositions(int steps, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(parts, 0);
  auto rec = [&](auto&& self, std::size_t index, int left) -> void {
    if (index + 1 == parts) {
      current[index] = left;
      out.push_back(current);
      return;
    }
    for (int v = left; v >= 0; --v) {
      current[index] = v;
      self(self, index + 1, left - v);
    }
  };
  rec(rec, 0, steps);
  return out;
}

double binomial(double n, double k) {
  double r = 1.0;
  for (double i = 1.0; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

GridResult grid_gap_oracle(const Network& network, const IncidenceMatrix& delta, double alpha,
                           int grid_steps) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(Errc::invalid_argument, "alpha must lie in [0, 1]");
  }
  if (grid_steps < 1) {
    throw Error(Errc::invalid_argument, "grid_steps must be >= 1");
  }
  const auto P = static_cast<std::size_t>(delta.paths());
  if (P == 0) throw Error(Errc::no_path_exists, "empty path set");
  const double per_class = binomial(static_cast<double>(grid_steps + static_cast<int>(P) - 1),
                                    static_cast<double>(P - 1));
  const bool has_h = alpha < 1.0;
  const bool has_a = alpha > 0.0;
  const double total = (has_h ? per_class : 1.0) * (has_a ? per_class : 1.0);
  if (grid_steps > 200 || total > static_cast<double>(kMaxGridEvaluations)) {
    throw Error(Errc::grid_budget_exceeded,
                "grid of " + std::to_string(grid_steps) + " steps over " + std::to_string(P) +
                    " paths needs " + std::to_string(total) + " evaluations");
  }

  const auto grid = compositions(grid_steps, P);
  const std::vector<std::vector<int>> zero{std::vector<int>(P, 0)};
  const auto& human_grid = has_h ? grid : zero;
  const auto& auto_grid = has_a ? grid : zero;
  const double unit = 1.0 / grid_steps;

  auto to_vector = [&](const std::vector<int>& counts, double demand) {
    Vector v(static_cast<Eigen::Index>(P));
    for (std::size_t i = 0; i < P; ++i) {
      v(static_cast<Eigen::Index>(i)) = counts[i] * unit * demand;
    }
    return v;
  };

  GridResult best;
  best.gap = std::numeric_limits<double>::infinity();
  for (const auto& h : human_grid) {
    const Vector x_h = to_vector(h, 1.0 - alpha);
    for (const auto& a : auto_grid) {
      FlowPattern flow = FlowPattern::from_path_flows(delta, alpha, x_h, to_vector(a, alpha));
      const double gap = vi_gap(network, delta, flow);
      ++best.evaluated;
      if (gap < best.gap) {
        best.gap = gap;
        best.flow = std::move(flow);
      }
    }
  }
  return best;
}

}  // namespace mixeq
