#include "mixeq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "mixeq/error.hpp"

namespace mixeq {

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 2) throw Error(Errc::invalid_argument, "steps must be >= 2");
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  }
  out.back() = hi;
  return out;
}

unsigned sweep_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MIXEQ_THREADS")) {
    const std::string_view text(env);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(Errc::invalid_argument, "MIXEQ_THREADS must be a non-negative integer");
    }
    if (value > 0) return value;
  }
  return hw;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::max(1u, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool SweepResult::all_converged() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const SweepRow& r) { return r.result.converged; });
}

SweepResult alpha_sweep(const Network& network, const IncidenceMatrix& delta,
                        const std::vector<double>& alphas, const SolverConfig& cfg,
                        unsigned threads) {
  SweepResult sweep;
  sweep.rows.resize(alphas.size());
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    SolverConfig run = cfg;
    run.alpha = alphas[i];
    sweep.rows[i].alpha = alphas[i];
    sweep.rows[i].result = solve_mixed(network, delta, run);
  });
  return sweep;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out;
  std::size_t paths = 0;
  for (const auto& row : sweep.rows) {
    paths = std::max(paths, static_cast<std::size_t>(row.result.flow.x_h.size()));
  }
  if (!sweep.parameter_name.empty()) out += sweep.parameter_name + ",";
  out += "alpha,social_cost,lambda_h,lambda_a,gap,converged";
  for (std::size_t p = 1; p <= paths; ++p) out += ",flow_p" + std::to_string(p);
  out += '\n';
  for (const auto& row : sweep.rows) {
    const EquilibriumResult& r = row.result;
    if (!sweep.parameter_name.empty()) out += format_double(row.parameter.value_or(0.0)) + ",";
    out += format_double(row.alpha) + "," + format_double(r.social) + "," +
           format_double(r.lambda_h) + "," + format_double(r.lambda_a) + "," +
           format_double(r.gap) + "," + (r.converged ? "true" : "false");
    const Vector x = r.flow.x();
    for (Eigen::Index p = 0; p < x.size(); ++p) out += "," + format_double(x(p));
    out += '\n';
  }
  return out;
}

Network braess_network(double k6, double b6) {
  const double k[6] = {10, 5, 2, 5, 3, k6};
  const double b[6] = {1, 8, 7, 1, 1, b6};
  const char* tail[6] = {"S", "A", "S", "B", "A", "S"};
  const char* head[6] = {"A", "T", "B", "T", "B", "T"};
  std::vector<Link> links;
  for (int i = 0; i < 6; ++i) {
    links.push_back({std::to_string(i + 1), tail[i], head[i], CostParams::polynomial(k[i], b[i], 1.0)});
  }
  return Network({"S", "A", "B", "T"}, std::move(links), "S", "T");
}

std::vector<std::vector<LinkId>> braess_declared_paths() {
  return {{"1", "2"}, {"3", "4"}, {"1", "5", "4"}, {"3", "5", "2"}, {"6"}};
}

const char* to_string(BraessVariant variant) {
  switch (variant) {
    case BraessVariant::paper: return "paper";
    case BraessVariant::deterioration: return "deterioration";
    case BraessVariant::sweep_k6: return "sweep_k6";
    case BraessVariant::sweep_b6: return "sweep_b6";
  }
  return "unknown";
}

std::optional<BraessVariant> parse_braess_variant(const std::string& name) {
  for (auto v : {BraessVariant::paper, BraessVariant::deterioration, BraessVariant::sweep_k6,
                 BraessVariant::sweep_b6}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

namespace {

IncidenceMatrix braess_incidence(const Network& network, bool enumerated_paths) {
  return incidence_matrix(network, enumerated_paths
                                       ? enumerate_paths(network)
                                       : declare_paths(network, braess_declared_paths()));
}

SweepResult parameter_sweep(const std::string& name, const std::vector<double>& grid, bool vary_k,
                            const SolverConfig& cfg, bool enumerated_paths, unsigned threads) {
  SweepResult sweep;
  sweep.parameter_name = name;
  sweep.rows.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const Network net = vary_k ? braess_network(grid[i], kDeteriorationB6)
                               : braess_network(kDeteriorationK6, grid[i]);
    SolverConfig run = cfg;
    run.alpha = kParameterSweepAlpha;
    sweep.rows[i].parameter = grid[i];
    sweep.rows[i].alpha = kParameterSweepAlpha;
    sweep.rows[i].result = solve_mixed(net, braess_incidence(net, enumerated_paths), run);
  });
  return sweep;
}

}  // namespace

SweepResult run_braess(BraessVariant variant, const SolverConfig& cfg, bool enumerated_paths,
                       unsigned threads) {
  switch (variant) {
    case BraessVariant::paper: {
      const Network net = braess_network();
      return alpha_sweep(net, braess_incidence(net, enumerated_paths), linspace(0.0, 1.0, 101),
                         cfg, threads);
    }
    case BraessVariant::deterioration: {
      const Network net = braess_network(kDeteriorationK6, kDeteriorationB6);
      return alpha_sweep(net, braess_incidence(net, enumerated_paths), linspace(0.0, 0.1, 51),
                         cfg, threads);
    }
    case BraessVariant::sweep_k6:
      return parameter_sweep("k6", linspace(0.5, 10.0, 50), true, cfg, enumerated_paths, threads);
    case BraessVariant::sweep_b6:
      return parameter_sweep("b6", linspace(15.0, 25.0, 50), false, cfg, enumerated_paths,
                             threads);
  }
  throw Error(Errc::invalid_argument, "unknown Braess variant");
}

}  // namespace mixeq
