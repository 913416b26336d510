#pragma once

#include "mixeq/netmodel.hpp"

namespace mixeq {

/// Per-link costs seen by each class at aggregated flow f.
struct ClassCosts {
  Vector human;       // t_a(f_a)
  Vector autonomous;  // t_a(f_a) + f_a t_a'(f_a)
};

/// Per-path costs, Delta^T applied to ClassCosts.
struct PathCosts {
  Vector human;
  Vector autonomous;
};

ClassCosts class_costs(const Network& network, const Vector& f);
Vector human_link_costs(const Network& network, const Vector& f);
Vector autonomous_link_costs(const Network& network, const Vector& f);

PathCosts path_costs(const Network& network, const IncidenceMatrix& delta, const Vector& f);

/// S(f) = sum_a f_a t_a(f_a).
double social_cost(const Network& network, const Vector& f);

/// Beckmann potential of the human class with the autonomous link flow
/// frozen: sum_a of the integral of t_a from f_a_fixed[a] to f_a_fixed[a] + f_h[a].
double beckmann_human(const Network& network, const Vector& f_h, const Vector& f_a_fixed);

/// Free-flow path costs Delta^T b.
Vector free_flow_path_costs(const Network& network, const IncidenceMatrix& delta);

bool all_links_linear(const Network& network);
/// True when every link uses the same exponent n.
bool single_exponent(const Network& network);

}  // namespace mixeq
