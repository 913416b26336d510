#include "mixeq/netmodel.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

#include "mixeq/error.hpp"

namespace mixeq {

Network::Network(std::vector<NodeId> nodes, std::vector<Link> links, NodeId origin,
                 NodeId destination, double demand)
    : nodes_(std::move(nodes)),
      links_(std::move(links)),
      origin_(std::move(origin)),
      destination_(std::move(destination)),
      demand_(demand) {
  std::unordered_set<std::string_view> node_set;
  for (const auto& node : nodes_) {
    if (!node_set.insert(node).second) {
      throw Error(Errc::invalid_network, "duplicate node id '" + node + "'");
    }
  }
  if (!node_set.contains(origin_)) {
    throw Error(Errc::invalid_network, "origin '" + origin_ + "' is not a node");
  }
  if (!node_set.contains(destination_)) {
    throw Error(Errc::invalid_network, "destination '" + destination_ + "' is not a node");
  }
  if (origin_ == destination_) {
    throw Error(Errc::invalid_network, "origin and destination coincide");
  }
  if (demand_ != 1.0) {
    throw Error(Errc::invalid_network, "demand must equal 1, got " + std::to_string(demand_));
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& link = links_[i];
    if (link.tail == link.head) {
      throw Error(Errc::invalid_network, "link '" + link.id + "' is a self-loop");
    }
    if (!node_set.contains(link.tail) || !node_set.contains(link.head)) {
      throw Error(Errc::invalid_network, "link '" + link.id + "' references an unknown node");
    }
    if (!link_index_.emplace(link.id, i).second) {
      throw Error(Errc::invalid_network, "duplicate link id '" + link.id + "'");
    }
    // Re-run parameter validation in case the struct was filled by hand.
    CostParams::polynomial(link.cost.k, link.cost.b, link.cost.n);
  }
}

std::optional<std::size_t> Network::link_index(std::string_view id) const {
  auto it = link_index_.find(std::string(id));
  if (it == link_index_.end()) return std::nullopt;
  return it->second;
}

bool Network::has_node(std::string_view id) const {
  return std::find(nodes_.begin(), nodes_.end(), id) != nodes_.end();
}

namespace {

// Outgoing links per node, each list sorted by link id.
std::unordered_map<NodeId, std::vector<std::size_t>> outgoing_by_id(const Network& network) {
  std::unordered_map<NodeId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < network.link_count(); ++i) {
    out[network.link(i).tail].push_back(i);
  }
  for (auto& [node, list] : out) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return network.link(a).id < network.link(b).id;
    });
  }
  return out;
}

bool id_sequence_less(const Network& network, const Path& a, const Path& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [&](std::size_t x, std::size_t y) { return network.link(x).id < network.link(y).id; });
}

}  // namespace

PathSet enumerate_paths(const Network& network, std::size_t max_paths) {
  if (max_paths < 1) {
    throw Error(Errc::invalid_argument, "max_paths must be >= 1");
  }
  const auto out = outgoing_by_id(network);
  PathSet result;
  result.source = PathSource::enumerated;

  Path current;
  std::unordered_set<NodeId> on_path{network.origin()};
  std::function<void(const NodeId&)> dfs = [&](const NodeId& node) {
    if (node == network.destination()) {
      if (result.paths.size() >= max_paths) {
        throw Error(Errc::path_budget_exceeded,
                    "more than " + std::to_string(max_paths) + " simple O/D paths");
      }
      result.paths.push_back(current);
      return;
    }
    auto it = out.find(node);
    if (it == out.end()) return;
    for (std::size_t a : it->second) {
      const NodeId& next = network.link(a).head;
      if (on_path.contains(next)) continue;
      on_path.insert(next);
      current.push_back(a);
      dfs(next);
      current.pop_back();
      on_path.erase(next);
    }
  };
  dfs(network.origin());

  if (result.paths.empty()) {
    throw Error(Errc::no_path_exists,
                "no path from '" + network.origin() + "' to '" + network.destination() + "'");
  }
  std::sort(result.paths.begin(), result.paths.end(),
            [&](const Path& a, const Path& b) { return id_sequence_less(network, a, b); });
  return result;
}

PathSet declare_paths(const Network& network, const std::vector<std::vector<LinkId>>& paths) {
  if (paths.empty()) {
    throw Error(Errc::no_path_exists, "declared path list is empty");
  }
  PathSet result;
  result.source = PathSource::declared;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& ids = paths[p];
    if (ids.empty()) {
      throw Error(Errc::invalid_network, "declared path " + std::to_string(p + 1) + " is empty");
    }
    Path path;
    for (const auto& id : ids) {
      auto index = network.link_index(id);
      if (!index) {
        throw Error(Errc::unknown_link, "declared path " + std::to_string(p + 1) +
                                            " references unknown link '" + id + "'");
      }
      path.push_back(*index);
    }
    if (network.link(path.front()).tail != network.origin()) {
      throw Error(Errc::invalid_network,
                  "declared path " + std::to_string(p + 1) + " does not start at the origin");
    }
    if (network.link(path.back()).head != network.destination()) {
      throw Error(Errc::invalid_network,
                  "declared path " + std::to_string(p + 1) + " does not end at the destination");
    }
    result.paths.push_back(std::move(path));
  }
  return result;
}

Matrix IncidenceMatrix::columns(std::span<const std::size_t> cols) const {
  Matrix out(delta.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = delta.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

IncidenceMatrix incidence_matrix(const Network& network, const PathSet& paths) {
  const auto L = static_cast<Eigen::Index>(network.link_count());
  const auto P = static_cast<Eigen::Index>(paths.size());
  IncidenceMatrix result{Matrix::Zero(L, P)};
  for (Eigen::Index p = 0; p < P; ++p) {
    for (std::size_t a : paths.paths[static_cast<std::size_t>(p)]) {
      if (a >= network.link_count()) {
        throw Error(Errc::unknown_link, "path " + std::to_string(p + 1) +
                                            " references link index " + std::to_string(a));
      }
      result.delta(static_cast<Eigen::Index>(a), p) = 1.0;
    }
  }
  return result;
}

std::optional<std::vector<NodeId>> node_sequence(const Network& network, const Path& path) {
  std::vector<NodeId> nodes{network.origin()};
  for (std::size_t a : path) {
    const Link& link = network.link(a);
    if (link.tail != nodes.back()) return std::nullopt;
    nodes.push_back(link.head);
  }
  return nodes;
}

std::optional<BundleChain> bundle_chain(const Network& network) {
  // Links on some origin->destination walk: tail reachable from the origin,
  // head reaching the destination, never leaving D or entering O.
  std::unordered_map<NodeId, std::vector<std::size_t>> out, in;
  for (std::size_t i = 0; i < network.link_count(); ++i) {
    out[network.link(i).tail].push_back(i);
    in[network.link(i).head].push_back(i);
  }
  auto reach = [](const NodeId& start, auto& adjacency, bool forward, const Network& net) {
    std::unordered_set<NodeId> seen{start};
    std::deque<NodeId> queue{start};
    while (!queue.empty()) {
      NodeId node = queue.front();
      queue.pop_front();
      for (std::size_t a : adjacency[node]) {
        const NodeId& next = forward ? net.link(a).head : net.link(a).tail;
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
    return seen;
  };
  const auto from_origin = reach(network.origin(), out, true, network);
  const auto to_destination = reach(network.destination(), in, false, network);

  std::unordered_map<NodeId, std::vector<std::size_t>> useful_out;
  std::size_t useful_count = 0;
  for (std::size_t i = 0; i < network.link_count(); ++i) {
    const Link& link = network.link(i);
    if (link.tail == network.destination() || link.head == network.origin()) continue;
    if (from_origin.contains(link.tail) && to_destination.contains(link.head)) {
      useful_out[link.tail].push_back(i);
      ++useful_count;
    }
  }

  BundleChain chain;
  chain.nodes.push_back(network.origin());
  std::unordered_set<NodeId> visited{network.origin()};
  std::size_t covered = 0;
  while (chain.nodes.back() != network.destination()) {
    auto it = useful_out.find(chain.nodes.back());
    if (it == useful_out.end() || it->second.empty()) return std::nullopt;
    const NodeId& next = network.link(it->second.front()).head;
    for (std::size_t a : it->second) {
      if (network.link(a).head != next) return std::nullopt;
    }
    if (!visited.insert(next).second) return std::nullopt;
    chain.bundles.push_back(it->second);
    covered += it->second.size();
    chain.nodes.push_back(next);
  }
  if (covered != useful_count) return std::nullopt;
  return chain;
}

bool is_path_multigraph(const Network& network) {
  if (bundle_chain(network)) return true;
  // Links that sit on O/D walks but on no simple path can defeat the
  // structural test; fall back to comparing node sequences directly.
  try {
    const PathSet paths = enumerate_paths(network);
    const auto first = node_sequence(network, paths[0]);
    for (const Path& path : paths.paths) {
      if (node_sequence(network, path) != first) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool columns_independent(const Matrix& delta_v, double rank_tolerance) {
  if (delta_v.cols() == 0) {
    throw Error(Errc::empty_support, "used-path set is empty");
  }
  if (delta_v.rows() < delta_v.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(delta_v);
  const Vector& sigma = svd.singularValues();
  const double largest = sigma.size() > 0 ? sigma(0) : 0.0;
  if (!(largest > 0.0)) return false;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) <= rank_tolerance * largest) return false;
  }
  return sigma.size() == delta_v.cols();
}

std::string describe_path(const Network& network, const Path& path) {
  std::string out = "{";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ",";
    out += network.link(path[i]).id;
  }
  return out + "}";
}

}  // namespace mixeq
