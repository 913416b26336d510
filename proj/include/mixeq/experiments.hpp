#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixeq/solver.hpp"

namespace mixeq {

/// `steps` evenly spaced points from lo to hi inclusive (steps >= 2).
std::vector<double> linspace(double lo, double hi, int steps);

/// Worker count for sweeps: MIXEQ_THREADS when set (0 = hardware
/// concurrency), otherwise hardware concurrency.
unsigned sweep_threads();

/// Calls task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

struct SweepRow {
  /// Swept link parameter for parameter sweeps (k6 / b6), unset for alpha sweeps.
  std::optional<double> parameter;
  double alpha = 0.0;
  EquilibriumResult result;
};

struct SweepResult {
  std::string parameter_name;  // empty for plain alpha sweeps
  std::vector<SweepRow> rows;  // in request order

  bool all_converged() const;
};

/// Solves at every alpha; rows come back in the order of `alphas`.
SweepResult alpha_sweep(const Network& network, const IncidenceMatrix& delta,
                        const std::vector<double>& alphas, const SolverConfig& cfg,
                        unsigned threads);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// CSV with header alpha,social_cost,lambda_h,lambda_a,gap,converged,flow_p1..
/// (prefixed by the parameter column for parameter sweeps). LF endings.
std::string sweep_csv(const SweepResult& sweep);

/// Built-in modified Braess network: links 1..6 over nodes S, A, B, T with
/// the given k and b for link 6 (S->T).
Network braess_network(double k6 = 7.0, double b6 = 11.0);

/// The five paths listed for the Braess experiments, including {3,5,2}
/// which traverses link 5 against its direction.
std::vector<std::vector<LinkId>> braess_declared_paths();

enum class BraessVariant { paper, deterioration, sweep_k6, sweep_b6 };

const char* to_string(BraessVariant variant);
std::optional<BraessVariant> parse_braess_variant(const std::string& name);

inline constexpr double kDeteriorationK6 = 1.0;
inline constexpr double kDeteriorationB6 = 18.3;
inline constexpr double kParameterSweepAlpha = 0.02;

/// Runs one built-in experiment. `enumerated_paths` swaps the declared
/// five-path list for the enumerated directed paths.
SweepResult run_braess(BraessVariant variant, const SolverConfig& cfg, bool enumerated_paths,
                       unsigned threads);

}  // namespace mixeq
