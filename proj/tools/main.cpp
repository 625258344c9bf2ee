#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "handles.hpp"

namespace {

void add_solver_flags(CLI::App* sub, cli::Options& o) {
  sub->add_option("--d-factor", o.d_factor, "sketch rows per column (d = factor*n)")
      ->check(CLI::Range(1.0, 1e6));
  sub->add_option("--zeta", o.zeta, "nonzeros per sketch column")->check(CLI::PositiveNumber);
  sub->add_flag("--safety", o.safety, "use eta = 1.2*sqrt(n/d)");
  sub->add_option("--tol-mult", o.tol_mult, "backward-error tolerance multiplier")
      ->check(CLI::PositiveNumber);
  sub->add_option("--iters", o.iters, "iterations for fixed-budget solvers (per step for SPIR)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "base seed; all randomness derives from it");
}

void add_experiment_flags(CLI::App* sub, cli::Options& o) {
  add_solver_flags(sub, o);
  sub->add_option("--m", o.m, "rows (comma list)")->delimiter(',')->check(CLI::PositiveNumber);
  sub->add_option("--n", o.n, "columns (comma list)")->delimiter(',')->check(CLI::PositiveNumber);
  sub->add_option("--solvers", o.solvers,
                  "fossils,fossils-basic,spir-lsqr,spir-cg,isk-momentum,sap-zero,sap-sks,qr")
      ->delimiter(',');
  sub->add_option("--seeds", o.seeds, "number of seeds")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "CSV output path (default stdout)");
  sub->add_flag("--deterministic", o.deterministic, "write runtime_ms = 0 for byte-stable output");
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void add_grid_flags(CLI::App* sub, cli::Options& o) {
  sub->add_option("--kappa", o.kappa, "condition numbers (comma list)")
      ->delimiter(',')
      ->check(CLI::Range(1.0, 1e300));
  auto* resid = sub->add_option("--resid", o.resid, "residual norms (comma list)")
                    ->delimiter(',')
                    ->check(CLI::NonNegativeNumber);
  sub->add_option("--resid-u", o.resid_u, "residual norms in units of u (comma list)")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber)
      ->excludes(resid);
}

int emit(const cli::Options& o, const std::function<int(std::ostream&)>& body) {
  if (o.out.empty()) return body(std::cout);
  std::ofstream f(o.out);
  if (!f) {
    std::cerr << "cannot open " << o.out << " for writing\n";
    return cli::kExitIo;
  }
  const int rc = body(f);
  f.flush();
  if (!f) {
    std::cerr << "write to " << o.out << " failed\n";
    return cli::kExitIo;
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized least-squares solvers and stability experiments"};
  app.require_subcommand(1);
  cli::Options o;

  auto* solve = app.add_subcommand("solve", "solve min ||b - Ax|| for MatrixMarket inputs");
  solve->add_option("--matrix", o.matrix, "A as a MatrixMarket file")->required();
  solve->add_option("--rhs", o.rhs, "b as an m x 1 MatrixMarket file")->required();
  solve->add_option("--solver", o.solver, "solver name")->capture_default_str();
  solve->add_option("--out", o.out, "write x as an array MatrixMarket file");
  add_solver_flags(solve, o);

  auto* compare = app.add_subcommand("compare", "per-iteration error traces across solvers");
  add_experiment_flags(compare, o);
  add_grid_flags(compare, o);

  auto* sweep = app.add_subcommand("sweep", "difficulty sweep: kappa = difficulty, resid = difficulty*u");
  add_experiment_flags(sweep, o);
  sweep->add_option("--difficulty-min", o.difficulty_min)->check(CLI::Range(1.0, 1e16));
  sweep->add_option("--difficulty-max", o.difficulty_max)->check(CLI::Range(1.0, 1e16));
  sweep->add_option("--difficulty-points", o.difficulty_points)->check(CLI::PositiveNumber);

  auto* grid = app.add_subcommand("grid", "kappa x residual grid");
  add_experiment_flags(grid, o);
  add_grid_flags(grid, o);

  auto* itcount = app.add_subcommand("itcount", "iteration counts with tolerance 4||A||_F u");
  add_experiment_flags(itcount, o);
  add_grid_flags(itcount, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    if (*solve) return cli::run_solve(o, std::cout, std::cerr);
    if (*sweep && o.difficulty_min > o.difficulty_max) {
      std::cerr << "--difficulty-min exceeds --difficulty-max\n";
      return cli::kExitUsage;
    }
    if (*compare) return emit(o, [&](std::ostream& os) { return cli::run_compare(o, os); });
    const std::string mode = *sweep ? "sweep" : *grid ? "grid" : "itcount";
    return emit(o, [&](std::ostream& os) { return cli::run_sweep(mode, o, os); });
  } catch (const cli::CallError& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.status) {
      case FLS_ERR_PARAMETER:
      case FLS_ERR_DIMENSION: return cli::kExitUsage;
      case FLS_ERR_IO: return cli::kExitIo;
      case FLS_ERR_PARSE:
      case FLS_ERR_UNSUPPORTED: return cli::kExitParse;
      case FLS_ERR_DIVERGENCE:
      case FLS_ERR_BREAKDOWN:
      case FLS_ERR_CONVERGENCE: return cli::kExitSolver;
      default: return cli::kExitInternal;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return cli::kExitInternal;
  }
}
