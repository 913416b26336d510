#include "support/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mixeq::testing {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct CostDraw {
  const CostRange& range;
  double shared;

  CostDraw(std::mt19937_64& rng, const CostRange& r) : range(r), shared(pick(rng)) {}

  double pick(std::mt19937_64& rng) const {
    return range.exponents[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(range.exponents.size()) - 1))];
  }

  CostParams operator()(std::mt19937_64& rng, double b) const {
    const double n = range.shared_exponent ? shared : pick(rng);
    return CostParams::polynomial(uniform(rng, range.k_lo, range.k_hi), b, n);
  }

  CostParams operator()(std::mt19937_64& rng) const {
    return (*this)(rng, uniform(rng, range.b_lo, range.b_hi));
  }
};

std::string node_name(int i) { return "n" + std::to_string(i); }

// Links of a DAG over nodes 0..m-1 (origin 0, destination m-1).
struct Edge {
  int tail;
  int head;
};

std::vector<Edge> random_edges(std::mt19937_64& rng, int nodes) {
  std::vector<Edge> edges;
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) {
      if (i == 0 && j == nodes - 1 && uniform(rng, 0, 1) < 0.5) continue;
      if (uniform(rng, 0, 1) < 0.55) edges.push_back({i, j});
      if (uniform(rng, 0, 1) < 0.1) edges.push_back({i, j});
    }
  }
  return edges;
}

long long count_paths(const std::vector<Edge>& edges, int nodes) {
  std::vector<long long> ways(static_cast<std::size_t>(nodes), 0);
  ways[0] = 1;
  for (int v = 1; v < nodes; ++v) {
    for (const Edge& e : edges) {
      if (e.head == v) ways[static_cast<std::size_t>(v)] += ways[static_cast<std::size_t>(e.tail)];
    }
  }
  return ways[static_cast<std::size_t>(nodes - 1)];
}

// Edges not on any O->D path are dropped so that every link matters.
std::vector<Edge> useful_edges(const std::vector<Edge>& edges, int nodes) {
  std::vector<bool> from_origin(static_cast<std::size_t>(nodes), false);
  std::vector<bool> to_dest(static_cast<std::size_t>(nodes), false);
  from_origin[0] = true;
  to_dest[static_cast<std::size_t>(nodes - 1)] = true;
  for (int v = 0; v < nodes; ++v) {
    for (const Edge& e : edges) {
      if (e.tail == v && from_origin[static_cast<std::size_t>(v)]) {
        from_origin[static_cast<std::size_t>(e.head)] = true;
      }
    }
  }
  for (int v = nodes - 1; v >= 0; --v) {
    for (const Edge& e : edges) {
      if (e.tail == v && to_dest[static_cast<std::size_t>(e.head)]) {
        to_dest[static_cast<std::size_t>(v)] = true;
      }
    }
  }
  std::vector<Edge> out;
  for (const Edge& e : edges) {
    if (from_origin[static_cast<std::size_t>(e.tail)] && to_dest[static_cast<std::size_t>(e.head)]) {
      out.push_back(e);
    }
  }
  return out;
}

Network build(int nodes, const std::vector<Edge>& edges, const std::vector<CostParams>& costs) {
  std::vector<NodeId> names;
  for (int i = 0; i < nodes; ++i) names.push_back(node_name(i));
  std::vector<Link> links;
  for (std::size_t a = 0; a < edges.size(); ++a) {
    links.push_back({"l" + std::to_string(a + 1), node_name(edges[a].tail),
                     node_name(edges[a].head), costs[a]});
  }
  return Network(names, links, node_name(0), node_name(nodes - 1));
}

std::vector<Edge> dag_edges(std::mt19937_64& rng, int min_paths, int max_paths, int& nodes) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    nodes = uniform_int(rng, 3, 5);
    auto edges = useful_edges(random_edges(rng, nodes), nodes);
    const long long p = count_paths(edges, nodes);
    if (p >= min_paths && p <= max_paths) return edges;
  }
  throw std::runtime_error("could not draw a DAG with the requested path count");
}

}  // namespace

Instance make_instance(std::string kind, Network network) {
  PathSet paths = enumerate_paths(network);
  IncidenceMatrix delta = incidence_matrix(network, paths);
  return {std::move(kind), std::move(network), std::move(paths), std::move(delta)};
}

Instance random_parallel(std::mt19937_64& rng, int paths, const CostRange& costs) {
  const CostDraw draw(rng, costs);
  std::vector<Edge> edges(static_cast<std::size_t>(paths), Edge{0, 1});
  std::vector<CostParams> c;
  for (int p = 0; p < paths; ++p) c.push_back(draw(rng));
  return make_instance("parallel", build(2, edges, c));
}

Instance random_series(std::mt19937_64& rng, int min_paths, int max_paths,
                       const CostRange& costs) {
  const CostDraw draw(rng, costs);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int bundles = uniform_int(rng, 2, 3);
    std::vector<int> sizes;
    int product = 1;
    for (int i = 0; i < bundles; ++i) {
      sizes.push_back(uniform_int(rng, 1, 3));
      product *= sizes.back();
    }
    if (product < min_paths || product > max_paths) continue;
    std::vector<Edge> edges;
    std::vector<CostParams> c;
    for (int i = 0; i < bundles; ++i) {
      for (int j = 0; j < sizes[static_cast<std::size_t>(i)]; ++j) {
        edges.push_back({i, i + 1});
        c.push_back(draw(rng));
      }
    }
    return make_instance("series", build(bundles + 1, edges, c));
  }
  throw std::runtime_error("could not draw a series network with the requested path count");
}

Instance random_dag(std::mt19937_64& rng, int min_paths, int max_paths, const CostRange& costs) {
  const CostDraw draw(rng, costs);
  int nodes = 0;
  const auto edges = dag_edges(rng, min_paths, max_paths, nodes);
  std::vector<CostParams> c;
  for (std::size_t a = 0; a < edges.size(); ++a) c.push_back(draw(rng));
  return make_instance("dag", build(nodes, edges, c));
}

Instance random_instance(std::mt19937_64& rng, int min_paths, int max_paths,
                         const CostRange& costs) {
  switch (uniform_int(rng, 0, 2)) {
    case 0: return random_parallel(rng, uniform_int(rng, min_paths, max_paths), costs);
    case 1: return random_series(rng, min_paths, max_paths, costs);
    default: return random_dag(rng, min_paths, max_paths, costs);
  }
}

Instance random_equal_free_flow(std::mt19937_64& rng, int min_paths, int max_paths,
                                const CostRange& costs, bool force_dag) {
  const CostDraw draw(rng, costs);
  int nodes = 2;
  std::vector<Edge> edges;
  if (force_dag || uniform_int(rng, 0, 1) == 0) {
    edges = dag_edges(rng, min_paths, max_paths, nodes);
  } else {
    edges.assign(static_cast<std::size_t>(uniform_int(rng, min_paths, max_paths)), Edge{0, 1});
  }
  std::vector<double> potential(static_cast<std::size_t>(nodes));
  for (double& p : potential) p = uniform(rng, costs.b_lo, costs.b_hi);
  std::sort(potential.begin(), potential.end());
  std::vector<CostParams> c;
  for (const Edge& e : edges) {
    c.push_back(draw(rng, potential[static_cast<std::size_t>(e.head)] -
                              potential[static_cast<std::size_t>(e.tail)]));
  }
  return make_instance(nodes == 2 ? "parallel-equal-b" : "dag-equal-b", build(nodes, edges, c));
}

int exact_rank(std::vector<std::vector<long long>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  int rank = 0;
  long long prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
      }
      a[i][c] = 0;
    }
    prev = a[r][c];
    ++r;
    ++rank;
  }
  return rank;
}

}  // namespace mixeq::testing

namespace mixeq::testing {

namespace {

double root_of(double level, double b, double scale, double n) {
  if (level <= b) return 0.0;
  return std::pow((level - b) / scale, 1.0 / n);
}

// Smallest x in [lo, hi] with pred(x), pred monotone false -> true.
template <class Pred>
double bisect_first(double lo, double hi, Pred pred) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Largest x in [lo, hi] with !pred(x). Used where the level inverse is flat
// (n > 1) and landing one ulp past the threshold would add a visible flow.
template <class Pred>
double bisect_last(double lo, double hi, Pred pred) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? hi : lo) = mid;
  }
  return lo;
}

}  // namespace

Vector parallel_mixed_flows(const std::vector<CostParams>& links, double alpha) {
  const std::size_t P = links.size();
  auto human_flow = [&](std::size_t j, double lambda) {
    return root_of(lambda, links[j].b, links[j].k, links[j].n);
  };
  auto auto_flow = [&](std::size_t j, double mu) {
    return root_of(mu, links[j].b, (links[j].n + 1) * links[j].k, links[j].n);
  };
  double lambda_max = 0.0;
  double mu_max_bound = 0.0;
  for (const auto& c : links) {
    lambda_max = std::max(lambda_max, c.k + c.b);
    mu_max_bound = std::max(mu_max_bound, (c.n + 1) * c.k + c.b);
  }
  auto total = [&](double lambda, double mu) {
    double t = 0.0;
    for (std::size_t j = 0; j < P; ++j) t += std::max(human_flow(j, lambda), auto_flow(j, mu));
    return t;
  };
  // Autonomous level at which autonomous routing alone carries all demand.
  const double mu_cap =
      bisect_first(0.0, mu_max_bound, [&](double mu) { return total(0.0, mu) >= 1.0; });
  auto lambda_for = [&](double mu) {
    return bisect_first(0.0, lambda_max, [&](double lambda) { return total(lambda, mu) >= 1.0; });
  };
  auto strict_auto_mass = [&](double mu) {
    const double lambda = lambda_for(mu);
    double a = 0.0;
    for (std::size_t j = 0; j < P; ++j) {
      const double h = human_flow(j, lambda);
      const double m = auto_flow(j, mu);
      if (m > h) a += m;
    }
    return a;
  };
  const double mu = bisect_last(0.0, mu_cap, [&](double m) { return strict_auto_mass(m) > alpha; });
  const double lambda = lambda_for(mu);
  Vector x(static_cast<Eigen::Index>(P));
  for (std::size_t j = 0; j < P; ++j) {
    x(static_cast<Eigen::Index>(j)) = std::max(human_flow(j, lambda), auto_flow(j, mu));
  }
  return x;
}

}  // namespace mixeq::testing
