#include "fossils/fossils.h"

#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "problems.hpp"
#include "solvers.hpp"

struct fls_matrix {
  fossils::DenseMatrix m;
};

struct fls_config {
  fossils::SolverConfig cfg;
};

struct fls_problem {
  fls_matrix a;
  fossils::Vector b;
  fossils::Vector x;
};

struct fls_result {
  fossils::SolveResult r;
};

struct fls_evaluator {
  std::unique_ptr<fossils::Evaluator> e;
};

namespace {

thread_local std::string g_last_error;

fls_status map_code(fossils::ErrorCode code) {
  using fossils::ErrorCode;
  switch (code) {
    case ErrorCode::dimension: return FLS_ERR_DIMENSION;
    case ErrorCode::parameter: return FLS_ERR_PARAMETER;
    case ErrorCode::singular: return FLS_ERR_SINGULAR;
    case ErrorCode::convergence: return FLS_ERR_CONVERGENCE;
    case ErrorCode::divergence: return FLS_ERR_DIVERGENCE;
    case ErrorCode::breakdown: return FLS_ERR_BREAKDOWN;
    case ErrorCode::parse: return FLS_ERR_PARSE;
    case ErrorCode::unsupported: return FLS_ERR_UNSUPPORTED;
    case ErrorCode::io: return FLS_ERR_IO;
  }
  return FLS_ERR_INTERNAL;
}

fls_status set_error(fls_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class F>
fls_status guarded(F&& f) {
  try {
    f();
    return FLS_OK;
  } catch (const fossils::Error& e) {
    return set_error(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FLS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FLS_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FLS_ERR_INTERNAL, "unknown exception");
  }
}

fls_status null_arg(const char* what) {
  return set_error(FLS_ERR_NULL_ARGUMENT, std::string("null argument: ") + what);
}

constexpr const char* kSolverNames[] = {"fossils",      "fossils-basic", "spir-lsqr",
                                        "spir-cg",      "isk-momentum",  "sap-zero",
                                        "sap-sks",      "qr"};

const double* vec_out(const fossils::Vector& v, size_t* len) {
  if (len != nullptr) *len = v.size();
  return v.data();
}

}  // namespace

extern "C" {

const char* fls_status_name(fls_status status) {
  switch (status) {
    case FLS_OK: return "ok";
    case FLS_ERR_DIMENSION: return "dimension";
    case FLS_ERR_PARAMETER: return "parameter";
    case FLS_ERR_SINGULAR: return "singular";
    case FLS_ERR_CONVERGENCE: return "convergence";
    case FLS_ERR_DIVERGENCE: return "divergence";
    case FLS_ERR_BREAKDOWN: return "breakdown";
    case FLS_ERR_PARSE: return "parse";
    case FLS_ERR_UNSUPPORTED: return "unsupported";
    case FLS_ERR_IO: return "io";
    case FLS_ERR_NULL_ARGUMENT: return "null-argument";
    case FLS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* fls_last_error(void) { return g_last_error.c_str(); }

double fls_unit_roundoff(void) { return fossils::kUnitRoundoff; }

// ---- matrices

fls_status fls_matrix_create(size_t rows, size_t cols, const double* colmajor, fls_matrix** out) {
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<fls_matrix>();
    if (colmajor != nullptr) {
      h->m = fossils::DenseMatrix(rows, cols, std::vector<double>(colmajor, colmajor + rows * cols));
    } else {
      h->m = fossils::DenseMatrix(rows, cols);
    }
    *out = h.release();
  });
}

void fls_matrix_destroy(fls_matrix* m) { delete m; }
size_t fls_matrix_rows(const fls_matrix* m) { return m ? m->m.rows() : 0; }
size_t fls_matrix_cols(const fls_matrix* m) { return m ? m->m.cols() : 0; }
const double* fls_matrix_data(const fls_matrix* m) { return m ? m->m.data().data() : nullptr; }

fls_status fls_matrix_read(const char* path, fls_matrix** out) {
  if (path == nullptr) return null_arg("path");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<fls_matrix>();
    h->m = fossils::read_matrix_market(path);
    *out = h.release();
  });
}

fls_status fls_matrix_write(const fls_matrix* m, const char* path, int coordinate) {
  if (m == nullptr) return null_arg("matrix");
  if (path == nullptr) return null_arg("path");
  return guarded([&] {
    fossils::write_matrix_market(m->m, path,
                                 coordinate ? fossils::MatrixMarketFormat::coordinate
                                            : fossils::MatrixMarketFormat::array);
  });
}

// ---- configuration

fls_status fls_config_create(fls_config** out) {
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fls_config(); });
}

void fls_config_destroy(fls_config* cfg) { delete cfg; }

#define FLS_SETTER(name, type, field, check, msg)                 \
  fls_status fls_config_set_##name(fls_config* cfg, type value) { \
    if (cfg == nullptr) return null_arg("config");                \
    if (!(check)) return set_error(FLS_ERR_PARAMETER, msg);       \
    cfg->cfg.field = value;                                       \
    return FLS_OK;                                                \
  }

FLS_SETTER(d_factor, double, d_factor, value >= 1.0 && std::isfinite(value), "d_factor must be >= 1")
FLS_SETTER(zeta, size_t, zeta, value > 0, "zeta must be positive")
FLS_SETTER(q_max, size_t, q_max, value > 0, "q_max must be positive")
FLS_SETTER(gamma, double, gamma, value >= 0.0, "gamma must be >= 0")
FLS_SETTER(rho, double, rho, value >= 0.0, "rho must be >= 0")
FLS_SETTER(tolerance_multiplier, double, be_tol_multiplier, value > 0.0,
           "tolerance multiplier must be > 0")
FLS_SETTER(check_every, size_t, check_every, value > 0, "check_every must be positive")
FLS_SETTER(mu_factor, double, mu_factor, value > 0.0, "mu factor must be > 0")
FLS_SETTER(seed, uint64_t, seed, true, "")

#undef FLS_SETTER

fls_status fls_config_set_eta(fls_config* cfg, double eta) {
  if (cfg == nullptr) return null_arg("config");
  if (eta <= 0.0) {
    cfg->cfg.eta_override.reset();
    return FLS_OK;
  }
  if (!(eta < 1.0)) return set_error(FLS_ERR_PARAMETER, "eta must lie in (0, 1)");
  cfg->cfg.eta_override = eta;
  return FLS_OK;
}

fls_status fls_config_set_safety(fls_config* cfg, int enabled) {
  if (cfg == nullptr) return null_arg("config");
  cfg->cfg.safety = enabled != 0;
  return FLS_OK;
}

// ---- problems

namespace {

fls_status wrap_problem(fossils::LeastSquaresProblem p, fls_problem** out) {
  auto h = std::make_unique<fls_problem>();
  h->a.m = std::move(p.a);
  h->b = std::move(p.b);
  if (p.x_true) h->x = std::move(*p.x_true);
  *out = h.release();
  return FLS_OK;
}

}  // namespace

fls_status fls_problem_generate(size_t m, size_t n, double kappa, double resid_norm,
                                uint64_t seed, fls_problem** out) {
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded(
      [&] { wrap_problem(fossils::generate_random_problem(m, n, kappa, resid_norm, seed), out); });
}

fls_status fls_problem_difficulty(size_t m, size_t n, double difficulty, uint64_t seed,
                                  fls_problem** out) {
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded(
      [&] { wrap_problem(fossils::difficulty_problem(m, n, difficulty, seed), out); });
}

void fls_problem_destroy(fls_problem* p) { delete p; }
const fls_matrix* fls_problem_matrix(const fls_problem* p) { return p ? &p->a : nullptr; }
const double* fls_problem_rhs(const fls_problem* p, size_t* len) {
  if (p == nullptr) return nullptr;
  return vec_out(p->b, len);
}
const double* fls_problem_solution(const fls_problem* p, size_t* len) {
  if (p == nullptr) return nullptr;
  return vec_out(p->x, len);
}

// ---- solving

fls_status fls_solver_from_name(const char* name, fls_solver* out) {
  if (name == nullptr) return null_arg("name");
  if (out == nullptr) return null_arg("out");
  for (int i = 0; i < static_cast<int>(std::size(kSolverNames)); ++i) {
    if (std::string_view(name) == kSolverNames[i]) {
      *out = static_cast<fls_solver>(i);
      return FLS_OK;
    }
  }
  return set_error(FLS_ERR_PARAMETER, std::string("unknown solver '") + name + "'");
}

const char* fls_solver_name(fls_solver solver) {
  const auto i = static_cast<size_t>(solver);
  return i < std::size(kSolverNames) ? kSolverNames[i] : "unknown";
}

fls_status fls_solve(fls_solver solver, const fls_matrix* a, const double* b, size_t b_len,
                     const fls_config* cfg, size_t iters, fls_iterate_callback callback,
                     void* user, fls_result** out) {
  if (a == nullptr) return null_arg("matrix");
  if (b == nullptr && b_len > 0) return null_arg("rhs");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const fossils::SolverConfig config = cfg ? cfg->cfg : fossils::SolverConfig{};
    const std::span<const double> rhs(b, b_len);
    fossils::IterateObserver observe;
    if (callback != nullptr) {
      observe = [callback, user](std::size_t k, std::span<const double> x) {
        callback(k, x.data(), x.size(), user);
      };
    }
    auto h = std::make_unique<fls_result>();
    using namespace fossils;
    switch (solver) {
      case FLS_SOLVER_FOSSILS: h->r = fossils_solve(a->m, rhs, config, observe); break;
      case FLS_SOLVER_FOSSILS_BASIC: h->r = fossils_basic(a->m, rhs, config, iters, observe); break;
      case FLS_SOLVER_SPIR_LSQR:
        h->r = spir(a->m, rhs, config, SpirInner::lsqr, iters, observe);
        break;
      case FLS_SOLVER_SPIR_CG: h->r = spir(a->m, rhs, config, SpirInner::cg, iters, observe); break;
      case FLS_SOLVER_ISK_MOMENTUM:
        h->r = iterative_sketching_momentum(a->m, rhs, config, iters, observe);
        break;
      case FLS_SOLVER_SAP_ZERO:
        h->r = sketch_and_precondition(a->m, rhs, SapInit::zero, config, iters, observe);
        break;
      case FLS_SOLVER_SAP_SKS:
        h->r = sketch_and_precondition(a->m, rhs, SapInit::sketch_and_solve, config, iters,
                                       observe);
        break;
      case FLS_SOLVER_QR: {
        h->r.x = qr_reference_solve(a->m, rhs);
        h->r.converged = true;
        h->r.step_solutions.push_back(h->r.x);
        if (observe) observe(0, h->r.x);
        break;
      }
      default: fail(ErrorCode::parameter, "unknown solver kind");
    }
    *out = h.release();
  });
}

void fls_result_destroy(fls_result* r) { delete r; }
const double* fls_result_solution(const fls_result* r, size_t* len) {
  return r ? vec_out(r->r.x, len) : nullptr;
}
int fls_result_converged(const fls_result* r) { return r && r->r.converged ? 1 : 0; }
int fls_result_regularized(const fls_result* r) { return r && r->r.regularized ? 1 : 0; }
double fls_result_mu(const fls_result* r) { return r ? r->r.mu : 0.0; }
double fls_result_condest(const fls_result* r) { return r ? r->r.condest : 0.0; }
double fls_result_normest(const fls_result* r) { return r ? r->r.normest : 0.0; }
double fls_result_eta(const fls_result* r) { return r ? r->r.eta : 0.0; }
double fls_result_iteration_floor(const fls_result* r) { return r ? r->r.iteration_floor : 0.0; }
size_t fls_result_refinement_steps(const fls_result* r) { return r ? r->r.refinement_steps : 0; }
size_t fls_result_step_iterations(const fls_result* r, size_t step) {
  if (r == nullptr || step >= r->r.inner_iterations.size()) return 0;
  return r->r.inner_iterations[step];
}
size_t fls_result_total_iterations(const fls_result* r) {
  return r ? r->r.total_iterations() : 0;
}
const double* fls_result_update_norms(const fls_result* r, size_t* len) {
  return r ? vec_out(r->r.update_norms, len) : nullptr;
}
const double* fls_result_be_history(const fls_result* r, size_t* len) {
  return r ? vec_out(r->r.be_history, len) : nullptr;
}
const double* fls_result_step_solution(const fls_result* r, size_t step, size_t* len) {
  if (r == nullptr || step >= r->r.step_solutions.size()) {
    if (len != nullptr) *len = 0;
    return nullptr;
  }
  return vec_out(r->r.step_solutions[step], len);
}
size_t fls_result_warning_count(const fls_result* r) { return r ? r->r.warnings.size() : 0; }
const char* fls_result_warning(const fls_result* r, size_t index) {
  if (r == nullptr || index >= r->r.warnings.size()) return nullptr;
  return r->r.warnings[index].c_str();
}

// ---- evaluation

fls_status fls_evaluator_create(const fls_matrix* a, const double* b, size_t b_len,
                                const double* x_true, size_t x_len, uint64_t seed, int exact_kw,
                                fls_evaluator** out) {
  if (a == nullptr) return null_arg("matrix");
  if (b == nullptr && b_len > 0) return null_arg("rhs");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    fossils::EvaluatorOptions opts;
    opts.seed = seed;
    opts.exact_kw = exact_kw != 0;
    std::optional<std::span<const double>> ref;
    if (x_true != nullptr) ref = std::span<const double>(x_true, x_len);
    auto h = std::make_unique<fls_evaluator>();
    h->e = std::make_unique<fossils::Evaluator>(a->m, std::span<const double>(b, b_len), ref, opts);
    *out = h.release();
  });
}

void fls_evaluator_destroy(fls_evaluator* e) { delete e; }

fls_status fls_evaluator_measure(const fls_evaluator* e, const double* xhat, size_t len,
                                 fls_metrics* out) {
  if (e == nullptr) return null_arg("evaluator");
  if (xhat == nullptr && len > 0) return null_arg("xhat");
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    const fossils::ErrorReport rep = e->e->measure(std::span<const double>(xhat, len));
    out->forward_err = rep.forward_err;
    out->residual_err = rep.residual_err;
    out->kw = rep.kw ? *rep.kw : std::nan("");
    out->kw_sketched = rep.kw_sketched;
    out->resid_orth = rep.resid_orth;
  });
}

}  // extern "C"
