#include "mixeq/link_cost.hpp"

#include <cmath>
#include <string>

#include "mixeq/error.hpp"

namespace mixeq {

CostParams CostParams::polynomial(double k, double b, double n) {
  if (!std::isfinite(k) || !std::isfinite(b) || !std::isfinite(n)) {
    throw Error(Errc::invalid_argument, "cost parameters must be finite");
  }
  if (!(k > 0.0)) {
    throw Error(Errc::invalid_argument, "cost parameter k must be > 0, got " + std::to_string(k));
  }
  if (!(b >= 0.0)) {
    throw Error(Errc::invalid_argument, "cost parameter b must be >= 0, got " + std::to_string(b));
  }
  if (!(n >= 1.0)) {
    throw Error(Errc::invalid_argument, "cost exponent n must be >= 1, got " + std::to_string(n));
  }
  return CostParams{k, b, n};
}

CostParams CostParams::bpr(double t0, double capacity, double theta, double beta) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) {
    throw Error(Errc::invalid_argument, "bpr t0 must be > 0");
  }
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw Error(Errc::invalid_argument, "bpr capacity m must be > 0");
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(Errc::invalid_argument, "bpr theta must be > 0 (converted k would vanish)");
  }
  if (!(beta >= 1.0) || !std::isfinite(beta)) {
    throw Error(Errc::invalid_argument, "bpr beta must be >= 1");
  }
  return polynomial(t0 * theta / std::pow(capacity, beta), t0, beta);
}

double flow_pow(double flow, double n) noexcept {
  if (flow <= 0.0) return 0.0;
  if (n == 1.0) return flow;
  if (n == 2.0) return flow * flow;
  if (n == 4.0) {
    const double sq = flow * flow;
    return sq * sq;
  }
  return std::exp(n * std::log(flow));
}

double travel_time(const CostParams& cost, double flow) noexcept {
  return cost.k * flow_pow(flow, cost.n) + cost.b;
}

double travel_time_slope(const CostParams& cost, double flow) noexcept {
  if (cost.n == 1.0) return cost.k;
  return cost.n * cost.k * flow_pow(flow, cost.n - 1.0);
}

double marginal_cost(const CostParams& cost, double flow) noexcept {
  return (cost.n + 1.0) * cost.k * flow_pow(flow, cost.n) + cost.b;
}

double marginal_cost_slope(const CostParams& cost, double flow) noexcept {
  if (cost.n == 1.0) return 2.0 * cost.k;
  return (cost.n + 1.0) * cost.n * cost.k * flow_pow(flow, cost.n - 1.0);
}

double travel_time_integral(const CostParams& cost, double from, double to) noexcept {
  const double np1 = cost.n + 1.0;
  return cost.k / np1 * (flow_pow(to, np1) - flow_pow(from, np1)) + cost.b * (to - from);
}

double inverse_travel_time(const CostParams& cost, double level) noexcept {
  if (level <= cost.b) return 0.0;
  const double ratio = (level - cost.b) / cost.k;
  if (cost.n == 1.0) return ratio;
  return std::pow(ratio, 1.0 / cost.n);
}

}  // namespace mixeq
