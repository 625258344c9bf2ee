#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "handles.hpp"

namespace cli {

namespace {

constexpr std::uint64_t kEvalSeedSalt = 0x5eedULL << 32;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::size_t default_iters(fls_solver s) {
  switch (s) {
    case FLS_SOLVER_SPIR_LSQR:
    case FLS_SOLVER_SPIR_CG:
    case FLS_SOLVER_FOSSILS_BASIC: return 50;
    default: return 100;
  }
}

Config make_config(const Options& opt, std::uint64_t seed, double default_tol_mult) {
  fls_config* raw = nullptr;
  check(fls_config_create(&raw));
  Config cfg(raw);
  check(fls_config_set_d_factor(raw, opt.d_factor));
  check(fls_config_set_zeta(raw, opt.zeta));
  check(fls_config_set_safety(raw, opt.safety ? 1 : 0));
  check(fls_config_set_tolerance_multiplier(raw, opt.tol_mult.value_or(default_tol_mult)));
  check(fls_config_set_seed(raw, seed));
  return cfg;
}

// Sketch seeds are derived from the problem seed so solvers sharing a seed
// also share the sketch.
std::uint64_t solver_seed(std::uint64_t problem_seed) {
  return problem_seed * 0x9E3779B97F4A7C15ULL + 1;
}

bool solver_failure(fls_status s) {
  return s == FLS_ERR_DIVERGENCE || s == FLS_ERR_BREAKDOWN || s == FLS_ERR_CONVERGENCE;
}

struct Metrics {
  double forward = std::nan("");
  double residual = std::nan("");
  double be = std::nan("");
  double orth = std::nan("");
};

Metrics measure(const fls_evaluator* ev, std::span<const double> x) {
  fls_metrics m{};
  check(fls_evaluator_measure(ev, x.data(), x.size(), &m));
  return {m.forward_err, m.residual_err, m.kw_sketched, m.resid_orth};
}

struct SolveOutcome {
  fls_status status = FLS_OK;
  std::string message;
  Result result;
  double runtime_ms = 0.0;
  std::vector<std::pair<std::size_t, std::vector<double>>> iterates;
};

void record_iterate(std::size_t k, const double* x, std::size_t n, void* user) {
  auto* out = static_cast<std::vector<std::pair<std::size_t, std::vector<double>>>*>(user);
  out->emplace_back(k, std::vector<double>(x, x + n));
}

SolveOutcome run_solver(fls_solver solver, const fls_problem* prob, const fls_config* cfg,
                        std::size_t iters, bool trace, bool deterministic) {
  SolveOutcome o;
  std::size_t b_len = 0;
  const double* b = fls_problem_rhs(prob, &b_len);
  fls_result* raw = nullptr;
  const auto t0 = std::chrono::steady_clock::now();
  o.status = fls_solve(solver, fls_problem_matrix(prob), b, b_len, cfg, iters,
                       trace ? record_iterate : nullptr, trace ? &o.iterates : nullptr, &raw);
  const auto t1 = std::chrono::steady_clock::now();
  o.result.reset(raw);
  if (o.status != FLS_OK) o.message = fls_last_error();
  o.runtime_ms =
      deterministic ? 0.0 : std::chrono::duration<double, std::milli>(t1 - t0).count();
  return o;
}

struct Cell {
  std::size_t m;
  std::size_t n;
  double kappa;
  double resid;
};

Problem make_problem(const Cell& c, std::uint64_t seed) {
  fls_problem* raw = nullptr;
  check(fls_problem_generate(c.m, c.n, c.kappa, c.resid, seed, &raw));
  return Problem(raw);
}

Evaluator make_evaluator(const fls_problem* prob, std::uint64_t seed) {
  std::size_t b_len = 0;
  std::size_t x_len = 0;
  const double* b = fls_problem_rhs(prob, &b_len);
  const double* x = fls_problem_solution(prob, &x_len);
  fls_evaluator* raw = nullptr;
  check(fls_evaluator_create(fls_problem_matrix(prob), b, b_len, x, x_len, kEvalSeedSalt ^ seed,
                             0, &raw));
  return Evaluator(raw);
}

std::vector<fls_solver> resolve_solvers(const std::vector<std::string>& names) {
  std::vector<fls_solver> out;
  for (const auto& name : names) {
    fls_solver s{};
    check(fls_solver_from_name(name.c_str(), &s));
    out.push_back(s);
  }
  return out;
}

std::vector<double> residuals(const Options& opt) {
  if (opt.resid_u.empty()) return opt.resid;
  std::vector<double> r;
  for (double v : opt.resid_u) r.push_back(v * fls_unit_roundoff());
  return r;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> v;
  if (count == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    v.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

// Runs `work(i)` for i in [0, count) on up to `jobs` threads; results land in
// caller-owned slots, so output order never depends on scheduling.
template <class F>
void parallel_for(std::size_t count, unsigned jobs, F&& work) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  std::exception_ptr first;
  std::mutex mu;
  auto guarded = [&](std::size_t i) {
    try {
      work(i);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(mu);
      if (!first) first = std::current_exception();
    }
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  if (first) std::rethrow_exception(first);
}

int exit_for(bool any_solver_failure, bool any_internal) {
  if (any_internal) return kExitInternal;
  return any_solver_failure ? kExitSolver : kExitOk;
}

}  // namespace

std::vector<std::string> default_solvers(const std::string& mode) {
  if (mode == "compare") {
    return {"fossils", "spir-lsqr", "spir-cg", "isk-momentum", "sap-zero", "sap-sks", "qr"};
  }
  if (mode == "itcount") return {"fossils"};
  return {"fossils", "qr"};
}

std::string compare_header() {
  return "kind,solver,seed,iter,forward_err,residual_err,be_sketched_kw,resid_orth,runtime_ms,"
         "status";
}

std::string sweep_header() {
  return "mode,m,n,kappa,resid,solver,seed,iterations,forward_err,residual_err,be_sketched_kw,"
         "resid_orth,regularized,converged,runtime_ms,status";
}

int run_compare(const Options& opt, std::ostream& os) {
  if (opt.m.size() != 1 || opt.n.size() != 1 || opt.kappa.size() != 1 ||
      residuals(opt).size() != 1) {
    std::cerr << "compare takes a single --m, --n, --kappa and residual value\n";
    return kExitUsage;
  }
  const Cell cell{opt.m[0], opt.n[0], opt.kappa[0], residuals(opt)[0]};
  const auto solvers = resolve_solvers(opt.solvers.empty() ? default_solvers("compare")
                                                           : opt.solvers);
  std::vector<std::string> blocks(opt.seeds);
  std::vector<char> failed(opt.seeds, 0);
  parallel_for(opt.seeds, opt.jobs, [&](std::size_t k) {
    const std::uint64_t seed = opt.seed + k;
    const Problem prob = make_problem(cell, seed);
    const Evaluator ev = make_evaluator(prob.get(), seed);
    const Config cfg = make_config(opt, solver_seed(seed), 1.0);
    std::string out;
    for (fls_solver s : solvers) {
      const std::string name = fls_solver_name(s);
      const bool direct = s == FLS_SOLVER_QR;
      SolveOutcome o = run_solver(s, prob.get(), cfg.get(), opt.iters.value_or(default_iters(s)),
                                  !direct, opt.deterministic);
      for (const auto& [it, x] : o.iterates) {
        const Metrics mt = measure(ev.get(), x);
        out += "iter," + name + "," + std::to_string(seed) + "," + std::to_string(it) + "," +
               num(mt.forward) + "," + num(mt.residual) + "," + num(mt.be) + "," +
               num(mt.orth) + ",,ok\n";
      }
      Metrics fin;
      std::size_t iters = 0;
      std::string status = "ok";
      if (o.status == FLS_OK) {
        std::size_t len = 0;
        const double* x = fls_result_solution(o.result.get(), &len);
        fin = measure(ev.get(), std::span<const double>(x, len));
        iters = fls_result_total_iterations(o.result.get());
      } else {
        status = fls_status_name(o.status);
        if (solver_failure(o.status)) failed[k] = 1;
        else failed[k] = 2;
        std::cerr << name << " (seed " << seed << "): " << o.message << "\n";
      }
      out += "final," + name + "," + std::to_string(seed) + "," + std::to_string(iters) + "," +
             num(fin.forward) + "," + num(fin.residual) + "," + num(fin.be) + "," +
             num(fin.orth) + "," + num(o.runtime_ms) + "," + status + "\n";
    }
    blocks[k] = std::move(out);
  });
  os << compare_header() << "\n";
  for (const auto& b : blocks) os << b;
  const bool any_fail = std::count(failed.begin(), failed.end(), 1) > 0;
  const bool any_internal = std::count(failed.begin(), failed.end(), 2) > 0;
  return exit_for(any_fail, any_internal);
}

int run_sweep(const std::string& mode, const Options& opt, std::ostream& os) {
  std::vector<Cell> cells;
  for (std::size_t m : opt.m) {
    for (std::size_t n : opt.n) {
      if (mode == "sweep") {
        for (double d : log_grid(opt.difficulty_min, opt.difficulty_max, opt.difficulty_points)) {
          cells.push_back({m, n, d, d * fls_unit_roundoff()});
        }
      } else {
        for (double kappa : opt.kappa)
          for (double r : residuals(opt)) cells.push_back({m, n, kappa, r});
      }
    }
  }
  const auto solvers = resolve_solvers(opt.solvers.empty() ? default_solvers(mode) : opt.solvers);
  const double default_tol = mode == "itcount" ? 4.0 : 1.0;

  const std::size_t units = cells.size() * opt.seeds;
  std::vector<std::string> blocks(units);
  std::vector<char> failed(units, 0);
  parallel_for(units, opt.jobs, [&](std::size_t u) {
    const Cell& c = cells[u / opt.seeds];
    const std::uint64_t seed = opt.seed + u % opt.seeds;
    const Problem prob = make_problem(c, seed);
    const Evaluator ev = make_evaluator(prob.get(), seed);
    const Config cfg = make_config(opt, solver_seed(seed), default_tol);
    std::string out;
    for (fls_solver s : solvers) {
      SolveOutcome o = run_solver(s, prob.get(), cfg.get(), opt.iters.value_or(default_iters(s)),
                                 false, opt.deterministic);
      Metrics fin;
      std::string status = "ok";
      std::size_t iters = 0;
      int regularized = 0;
      int converged = 0;
      if (o.status == FLS_OK) {
        std::size_t len = 0;
        const double* x = fls_result_solution(o.result.get(), &len);
        fin = measure(ev.get(), std::span<const double>(x, len));
        iters = fls_result_total_iterations(o.result.get());
        regularized = fls_result_regularized(o.result.get());
        converged = fls_result_converged(o.result.get());
      } else {
        status = fls_status_name(o.status);
        failed[u] = solver_failure(o.status) ? 1 : 2;
        std::cerr << fls_solver_name(s) << " (seed " << seed << "): " << o.message << "\n";
      }
      out += mode + "," + std::to_string(c.m) + "," + std::to_string(c.n) + "," + num(c.kappa) +
             "," + num(c.resid) + "," + fls_solver_name(s) + "," + std::to_string(seed) + "," +
             std::to_string(iters) + "," + num(fin.forward) + "," + num(fin.residual) + "," +
             num(fin.be) + "," + num(fin.orth) + "," + std::to_string(regularized) + "," +
             std::to_string(converged) + "," + num(o.runtime_ms) + "," + status + "\n";
    }
    blocks[u] = std::move(out);
  });
  os << sweep_header() << "\n";
  for (const auto& b : blocks) os << b;
  const bool any_fail = std::count(failed.begin(), failed.end(), 1) > 0;
  const bool any_internal = std::count(failed.begin(), failed.end(), 2) > 0;
  return exit_for(any_fail, any_internal);
}

namespace {

int exit_for_status(fls_status s) {
  switch (s) {
    case FLS_ERR_IO: return kExitIo;
    case FLS_ERR_PARSE:
    case FLS_ERR_UNSUPPORTED: return kExitParse;
    case FLS_ERR_DIVERGENCE:
    case FLS_ERR_BREAKDOWN:
    case FLS_ERR_CONVERGENCE: return kExitSolver;
    case FLS_ERR_DIMENSION:
    case FLS_ERR_PARAMETER:
    case FLS_ERR_NULL_ARGUMENT: return kExitUsage;
    default: return kExitInternal;
  }
}

}  // namespace

int run_solve(const Options& opt, std::ostream& os, std::ostream& err) {
  if (opt.matrix.empty() || opt.rhs.empty()) {
    err << "solve needs --matrix and --rhs\n";
    return kExitUsage;
  }
  fls_solver solver{};
  if (fls_solver_from_name(opt.solver.c_str(), &solver) != FLS_OK) {
    err << fls_last_error() << "\n";
    return kExitUsage;
  }
  fls_matrix* raw = nullptr;
  fls_status st = fls_matrix_read(opt.matrix.c_str(), &raw);
  if (st != FLS_OK) {
    err << "reading " << opt.matrix << ": " << fls_last_error() << "\n";
    return exit_for_status(st);
  }
  const Matrix a(raw);
  st = fls_matrix_read(opt.rhs.c_str(), &raw);
  if (st != FLS_OK) {
    err << "reading " << opt.rhs << ": " << fls_last_error() << "\n";
    return exit_for_status(st);
  }
  const Matrix bm(raw);
  const std::size_t m = fls_matrix_rows(a.get());
  const std::size_t n = fls_matrix_cols(a.get());
  const std::size_t br = fls_matrix_rows(bm.get());
  const std::size_t bc = fls_matrix_cols(bm.get());
  const std::size_t b_len = br * bc;
  if (std::min(br, bc) != 1 || b_len != m) {
    err << "dimension mismatch: A is " << m << "x" << n << " but b is " << br << "x" << bc
        << "\n";
    return kExitUsage;
  }
  if (m < n || n == 0) {
    err << "dimension mismatch: A is " << m << "x" << n << "; need rows >= cols >= 1\n";
    return kExitUsage;
  }
  const double* b = fls_matrix_data(bm.get());

  Config cfg = make_config(opt, opt.seed, 1.0);
  fls_result* rr = nullptr;
  st = fls_solve(solver, a.get(), b, b_len, cfg.get(),
                 opt.iters.value_or(default_iters(solver)), nullptr, nullptr, &rr);
  if (st != FLS_OK) {
    err << "solve failed: " << fls_last_error() << "\n";
    return exit_for_status(st);
  }
  const Result res(rr);
  for (std::size_t i = 0; i < fls_result_warning_count(res.get()); ++i) {
    err << fls_result_warning(res.get(), i) << "\n";
  }
  std::size_t len = 0;
  const double* x = fls_result_solution(res.get(), &len);

  fls_evaluator* er = nullptr;
  check(fls_evaluator_create(a.get(), b, b_len, nullptr, 0, kEvalSeedSalt ^ opt.seed, 0, &er));
  const Evaluator ev(er);
  const Metrics mt = measure(ev.get(), std::span<const double>(x, len));

  os << "solver: " << fls_solver_name(solver) << "\n"
     << "rows: " << m << "\n"
     << "cols: " << n << "\n"
     << "condest: " << num(fls_result_condest(res.get())) << "\n"
     << "normest: " << num(fls_result_normest(res.get())) << "\n"
     << "iterations: " << fls_result_total_iterations(res.get()) << "\n"
     << "be_sketched_kw: " << num(mt.be) << "\n"
     << "resid_orth: " << num(mt.orth) << "\n"
     << "regularized: " << fls_result_regularized(res.get()) << "\n"
     << "mu: " << num(fls_result_mu(res.get())) << "\n"
     << "converged: " << fls_result_converged(res.get()) << "\n";

  if (!opt.out.empty()) {
    fls_matrix* xm = nullptr;
    check(fls_matrix_create(len, 1, x, &xm));
    const Matrix xh(xm);
    st = fls_matrix_write(xh.get(), opt.out.c_str(), 0);
    if (st != FLS_OK) {
      err << "writing " << opt.out << ": " << fls_last_error() << "\n";
      return exit_for_status(st);
    }
  } else {
    char buf[40];
    os << "solution:\n";
    for (std::size_t i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", x[i]);
      os << buf << "\n";
    }
  }
  return fls_result_converged(res.get()) ? kExitOk : kExitSolver;
}

}  // namespace cli
