#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mixeq/link_cost.hpp"

namespace mixeq {

using NodeId = std::string;
using LinkId = std::string;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Link {
  LinkId id;
  NodeId tail;
  NodeId head;
  CostParams cost;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Directed road network with a single O/D pair and unit demand.
/// Immutable once constructed; the constructor enforces every invariant.
class Network {
 public:
  Network(std::vector<NodeId> nodes, std::vector<Link> links, NodeId origin,
          NodeId destination, double demand = 1.0);

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const Link& link(std::size_t index) const { return links_.at(index); }
  std::size_t link_count() const noexcept { return links_.size(); }
  const NodeId& origin() const noexcept { return origin_; }
  const NodeId& destination() const noexcept { return destination_; }
  double demand() const noexcept { return demand_; }

  std::optional<std::size_t> link_index(std::string_view id) const;
  bool has_node(std::string_view id) const;

  friend bool operator==(const Network& lhs, const Network& rhs) {
    return lhs.nodes_ == rhs.nodes_ && lhs.links_ == rhs.links_ && lhs.origin_ == rhs.origin_ &&
           lhs.destination_ == rhs.destination_ && lhs.demand_ == rhs.demand_;
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Link> links_;
  NodeId origin_;
  NodeId destination_;
  double demand_;
  std::unordered_map<LinkId, std::size_t> link_index_;
};

/// Ordered link indices (into Network::links) from origin to destination.
using Path = std::vector<std::size_t>;

enum class PathSource { enumerated, declared };

struct PathSet {
  std::vector<Path> paths;
  PathSource source = PathSource::enumerated;

  std::size_t size() const noexcept { return paths.size(); }
  const Path& operator[](std::size_t p) const { return paths[p]; }
};

inline constexpr std::size_t kDefaultMaxPaths = 10'000;
inline constexpr double kDefaultRankTolerance = 1e-10;

/// All simple origin->destination paths, sorted lexicographically by their
/// link-id sequences. Throws NoPathExists / PathBudgetExceeded.
PathSet enumerate_paths(const Network& network, std::size_t max_paths = kDefaultMaxPaths);

/// Paths given by link ids. Only link existence and the endpoints are
/// checked (first link leaves the origin, last link enters the destination);
/// arc direction along the path is deliberately not validated.
PathSet declare_paths(const Network& network, const std::vector<std::vector<LinkId>>& paths);

/// L x P link-path incidence matrix.
struct IncidenceMatrix {
  Matrix delta;

  Eigen::Index links() const noexcept { return delta.rows(); }
  Eigen::Index paths() const noexcept { return delta.cols(); }

  /// Restriction to the given path columns, in the given order.
  Matrix columns(std::span<const std::size_t> cols) const;
};

IncidenceMatrix incidence_matrix(const Network& network, const PathSet& paths);

/// Node sequence visited when walking the path from the origin. Returns
/// nullopt when consecutive links do not chain head-to-tail.
std::optional<std::vector<NodeId>> node_sequence(const Network& network, const Path& path);

/// Bundles of parallel links between consecutive nodes of a path multigraph.
struct BundleChain {
  std::vector<NodeId> nodes;                      // v_1 .. v_N
  std::vector<std::vector<std::size_t>> bundles;  // bundles[i]: links v_i -> v_{i+1}
};

/// Series-of-parallel-bundles decomposition of the part of the network that
/// lies on origin->destination paths, if it is a path multigraph.
std::optional<BundleChain> bundle_chain(const Network& network);

/// True iff every O/D path visits the same node sequence.
bool is_path_multigraph(const Network& network);

/// Numerical full column rank test via singular values, relative to the
/// largest one. Throws EmptySupport for a matrix without columns.
bool columns_independent(const Matrix& delta_v, double rank_tolerance = kDefaultRankTolerance);

/// "{1,5,4}" style label built from link ids.
std::string describe_path(const Network& network, const Path& path);

}  // namespace mixeq
