#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitParse = 3,
  kExitSolver = 4,  // divergence, breakdown or non-convergence
  kExitInternal = 5,
};

struct Options {
  std::vector<std::size_t> m{1000};
  std::vector<std::size_t> n{50};
  std::vector<double> kappa{1e12};
  std::vector<double> resid{1e-6};
  std::vector<double> resid_u;  // residual norms in units of u; overrides resid
  double difficulty_min = 1.0;
  double difficulty_max = 1e16;
  std::size_t difficulty_points = 17;
  std::vector<std::string> solvers;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  double d_factor = 12.0;
  std::size_t zeta = 8;
  bool safety = false;
  std::optional<double> tol_mult;
  std::optional<std::size_t> iters;
  std::string out;
  bool deterministic = false;
  unsigned jobs = 1;
  std::string matrix;
  std::string rhs;
  std::string solver = "fossils";
};

/// compare: per-iteration error traces for each solver on one problem family.
int run_compare(const Options& opt, std::ostream& os);
/// sweep: difficulty grid; grid: κ × residual grid; itcount: iteration counts
/// with the loosened tolerance across (m, n, κ, residual).
int run_sweep(const std::string& mode, const Options& opt, std::ostream& os);
/// solve: MatrixMarket A and b in, solution and report out.
int run_solve(const Options& opt, std::ostream& os, std::ostream& err);

/// Solver default lists per subcommand.
std::vector<std::string> default_solvers(const std::string& mode);

std::string compare_header();
std::string sweep_header();

}  // namespace cli
