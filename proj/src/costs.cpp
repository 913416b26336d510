#include "mixeq/costs.hpp"

#include <string>

#include "mixeq/error.hpp"

namespace mixeq {

namespace {

void require_link_vector(const Network& network, const Vector& v, const char* name) {
  if (static_cast<std::size_t>(v.size()) != network.link_count()) {
    throw Error(Errc::dimension_mismatch, std::string(name) + " has " + std::to_string(v.size()) +
                                              " entries, network has " +
                                              std::to_string(network.link_count()) + " links");
  }
}

}  // namespace

ClassCosts class_costs(const Network& network, const Vector& f) {
  return {human_link_costs(network, f), autonomous_link_costs(network, f)};
}

Vector human_link_costs(const Network& network, const Vector& f) {
  require_link_vector(network, f, "link flow");
  Vector c(f.size());
  for (Eigen::Index a = 0; a < f.size(); ++a) {
    c(a) = travel_time(network.link(static_cast<std::size_t>(a)).cost, f(a));
  }
  return c;
}

Vector autonomous_link_costs(const Network& network, const Vector& f) {
  require_link_vector(network, f, "link flow");
  Vector c(f.size());
  for (Eigen::Index a = 0; a < f.size(); ++a) {
    c(a) = marginal_cost(network.link(static_cast<std::size_t>(a)).cost, f(a));
  }
  return c;
}

PathCosts path_costs(const Network& network, const IncidenceMatrix& delta, const Vector& f) {
  if (static_cast<std::size_t>(delta.links()) != network.link_count()) {
    throw Error(Errc::dimension_mismatch, "incidence matrix rows do not match network links");
  }
  const ClassCosts costs = class_costs(network, f);
  return {delta.delta.transpose() * costs.human, delta.delta.transpose() * costs.autonomous};
}

double social_cost(const Network& network, const Vector& f) {
  require_link_vector(network, f, "link flow");
  double total = 0.0;
  for (Eigen::Index a = 0; a < f.size(); ++a) {
    total += f(a) * travel_time(network.link(static_cast<std::size_t>(a)).cost, f(a));
  }
  return total;
}

double beckmann_human(const Network& network, const Vector& f_h, const Vector& f_a_fixed) {
  require_link_vector(network, f_h, "human link flow");
  require_link_vector(network, f_a_fixed, "autonomous link flow");
  double total = 0.0;
  for (Eigen::Index a = 0; a < f_h.size(); ++a) {
    total += travel_time_integral(network.link(static_cast<std::size_t>(a)).cost, f_a_fixed(a),
                                  f_a_fixed(a) + f_h(a));
  }
  return total;
}

Vector free_flow_path_costs(const Network& network, const IncidenceMatrix& delta) {
  Vector b(static_cast<Eigen::Index>(network.link_count()));
  for (std::size_t a = 0; a < network.link_count(); ++a) {
    b(static_cast<Eigen::Index>(a)) = network.link(a).cost.b;
  }
  return delta.delta.transpose() * b;
}

bool all_links_linear(const Network& network) {
  for (const Link& link : network.links()) {
    if (!link.cost.is_linear()) return false;
  }
  return true;
}

bool single_exponent(const Network& network) {
  for (const Link& link : network.links()) {
    if (link.cost.n != network.links().front().cost.n) return false;
  }
  return true;
}

}  // namespace mixeq
