#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace mixeq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

struct CommandOptions {
  std::string network;
  double alpha = 0.0;
  double alpha_min = 0.0;
  double alpha_max = 1.0;
  int steps = 11;
  std::string out;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  bool enumerated_paths = false;
  std::string variant = "all";
  int starts = 0;
  int grid_steps = 20;
  int max_outer = 1000;
};

int cmd_solve(const CommandOptions& opt, std::ostream& out);
int cmd_sweep(const CommandOptions& opt, std::ostream& out);
int cmd_analyze(const CommandOptions& opt, std::ostream& out);
int cmd_oracle(const CommandOptions& opt, std::ostream& out);
int cmd_braess(const CommandOptions& opt, std::ostream& out);
int cmd_compare_centralized(const CommandOptions& opt, std::ostream& out);

/// Parses argv, runs the subcommand and maps every failure to an exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixeq
