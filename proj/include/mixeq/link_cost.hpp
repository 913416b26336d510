#pragma once

namespace mixeq {

/// Link travel time t(f) = k * f^n + b with k > 0, b >= 0, n >= 1.
///
/// This polynomial form is the only representation kept after ingestion;
/// BPR parameters are converted by `CostParams::bpr`.
struct CostParams {
  double k = 1.0;
  double b = 0.0;
  double n = 1.0;

  /// Throws Error(invalid_argument) unless k > 0, b >= 0, n >= 1 (all finite).
  static CostParams polynomial(double k, double b, double n);

  /// t0 * (1 + theta * (f / capacity)^beta), converted to
  /// k = t0 * theta / capacity^beta, n = beta, b = t0.
  /// theta must be strictly positive since the converted k must be.
  static CostParams bpr(double t0, double capacity, double theta, double beta);

  bool is_linear() const noexcept { return n == 1.0; }

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

/// f^n for f >= 0, n >= 1. Negative roundoff is treated as zero flow and
/// 0^n is returned as 0 explicitly.
double flow_pow(double flow, double n) noexcept;

double travel_time(const CostParams& cost, double flow) noexcept;

/// t'(f) = n k f^(n-1).
double travel_time_slope(const CostParams& cost, double flow) noexcept;

/// d(f t(f))/df = t(f) + f t'(f) = (n+1) k f^n + b.
double marginal_cost(const CostParams& cost, double flow) noexcept;

/// d/df of marginal_cost, (n+1) n k f^(n-1).
double marginal_cost_slope(const CostParams& cost, double flow) noexcept;

/// Integral of t over [from, to].
double travel_time_integral(const CostParams& cost, double from, double to) noexcept;

/// Smallest flow f >= 0 with t(f) >= level, i.e. ((level - b) / k)^(1/n),
/// or 0 when level <= b.
double inverse_travel_time(const CostParams& cost, double level) noexcept;

}  // namespace mixeq
