#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "error.hpp"
#include "estimators.hpp"
#include "problems.hpp"

namespace fossils {

void SolverConfig::validate() const {
  if (!(d_factor >= 1.0) || !std::isfinite(d_factor)) {
    fail(ErrorCode::parameter, "d_factor must be a finite value >= 1");
  }
  if (zeta == 0) fail(ErrorCode::parameter, "zeta must be positive");
  if (q_max == 0) fail(ErrorCode::parameter, "q_max must be positive");
  if (check_every == 0) fail(ErrorCode::parameter, "check_every must be positive");
  if (eta_override && !(*eta_override > 0.0 && *eta_override < 1.0)) {
    fail(ErrorCode::parameter, "eta override must lie in (0, 1)");
  }
  if (!(gamma >= 0.0) || !(rho >= 0.0)) fail(ErrorCode::parameter, "gamma and rho must be >= 0");
  if (!(be_tol_multiplier > 0.0)) fail(ErrorCode::parameter, "tolerance multiplier must be > 0");
  if (!(mu_factor > 0.0)) fail(ErrorCode::parameter, "mu_factor must be > 0");
  if (!(rank_deficiency_threshold > 1.0)) {
    fail(ErrorCode::parameter, "rank deficiency threshold must exceed 1");
  }
}

std::size_t SolverConfig::sketch_dim(std::size_t n) const {
  const auto d = static_cast<std::size_t>(std::ceil(d_factor * static_cast<double>(n)));
  return std::max(d, n);
}

double SolverConfig::eta(std::size_t n, std::size_t d) const {
  double e = eta_override ? *eta_override
                          : std::sqrt(static_cast<double>(n) / static_cast<double>(d)) *
                                (safety ? 1.2 : 1.0);
  if (!(e > 0.0 && e < 1.0)) {
    fail(ErrorCode::parameter, "resolved distortion " + std::to_string(e) +
                                   " is outside (0, 1); increase d_factor");
  }
  return e;
}

MomentumCoefficients SolverConfig::momentum(std::size_t n, std::size_t d) const {
  return MomentumCoefficients::from_distortion(eta(n, d));
}

std::size_t SolveResult::total_iterations() const {
  std::size_t t = 0;
  for (std::size_t k : inner_iterations) t += k;
  return t;
}

double iteration_floor(double condest, double eta) {
  const double ku = condest * kUnitRoundoff;
  if (!(ku < 1.0) || !(eta > 0.0)) return 11.0;
  return std::max(1.0 + 2.0 * std::log(1.0 / ku) / std::log(1.0 / (1.01 * eta)), 11.0);
}

namespace {

void check_inputs(const DenseMatrix& a, std::span<const double> b) {
  if (a.cols() == 0 || a.rows() < a.cols()) {
    fail(ErrorCode::dimension, "least squares needs m >= n >= 1, got " +
                                   std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (b.size() != a.rows()) {
    fail(ErrorCode::dimension, "A is " + std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()) + " but b has length " +
                                   std::to_string(b.size()));
  }
  if (!a.all_finite()) fail(ErrorCode::parameter, "A has non-finite entries");
  for (double v : b) {
    if (!std::isfinite(v)) fail(ErrorCode::parameter, "b has non-finite entries");
  }
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double t) { return t == 0.0; });
}

SolveResult zero_solution(std::size_t n) {
  SolveResult res;
  res.x.assign(n, 0.0);
  res.converged = true;
  res.step_solutions.push_back(res.x);
  return res;
}

struct QrSketch {
  SparseSignEmbedding s;
  QrFactorization qr;
  std::size_t d;
};

QrSketch sketch_qr(const DenseMatrix& a, const SolverConfig& cfg) {
  const std::size_t d = cfg.sketch_dim(a.cols());
  Rng rng(cfg.seed);
  SparseSignEmbedding s = SparseSignEmbedding::draw(a.rows(), d, std::min(cfg.zeta, d), rng);
  QrFactorization qr = householder_qr(s.apply(a));
  return {std::move(s), std::move(qr), d};
}

void fill_estimates(SolveResult& res, const DenseMatrix& r) {
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.rows(); ++i) {
    hi = std::max(hi, r(i, i));
    lo = std::min(lo, r(i, i));
  }
  // Diagonal of R brackets the extreme singular values only loosely; good
  // enough for the comparators, which do not act on these numbers.
  res.normest = hi;
  res.condest = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

void notify(const IterateObserver& observe, std::size_t k, std::span<const double> x) {
  if (observe) observe(k, x);
}

std::string format_condest(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", c);
  return buf;
}

}  // namespace

Vector sketch_and_solve(const DenseMatrix& a, std::span<const double> b,
                        const SparseSignEmbedding& s, const QrFactorization& qr_of_sa) {
  if (b.size() != a.rows() || s.input_dim() != a.rows()) {
    fail(ErrorCode::dimension, "sketch_and_solve: dimensions disagree");
  }
  if (qr_of_sa.r.rows() != a.cols() || qr_of_sa.q.rows() != s.output_dim()) {
    fail(ErrorCode::dimension, "sketch_and_solve: factorization does not match S·A");
  }
  return tri_solve(qr_of_sa.r, matvec_t(qr_of_sa.q, s.apply(b)), false);
}

SolveResult fossils_solve(const DenseMatrix& a_in, std::span<const double> b,
                          const SolverConfig& cfg, const IterateObserver& observe) {
  cfg.validate();
  check_inputs(a_in, b);
  const std::size_t n = a_in.cols();
  if (all_zero(a_in.data())) fail(ErrorCode::parameter, "A is the zero matrix");
  if (all_zero(b)) {
    SolveResult res = zero_solution(n);
    notify(observe, 0, res.x);
    return res;
  }

  const ColumnScaling scaling = column_scale(a_in, /*allow_zero=*/true);
  const DenseMatrix& a = scaling.a_scaled;
  const double a_fro = frobenius_norm(a);
  const double b_norm = norm2(b);

  SolveResult res;
  const std::size_t d = cfg.sketch_dim(n);
  res.sketch_rows = d;
  const MomentumCoefficients coeffs = cfg.momentum(n, d);
  res.eta = coeffs.eta;

  Rng rng(cfg.seed);
  const SparseSignEmbedding s =
      SparseSignEmbedding::draw(a.rows(), d, std::min(cfg.zeta, d), rng);
  const SvdFactorization f = svd(s.apply(a));
  res.normest = f.sigma.front();
  res.condest = f.sigma.back() > 0.0 ? f.sigma.front() / f.sigma.back()
                                     : std::numeric_limits<double>::infinity();
  if (res.condest > cfg.rank_deficiency_threshold) {
    res.warnings.push_back("Warning! Condition number estimate is " +
                           format_condest(res.condest));
    res.regularized = true;
    res.mu = cfg.mu_factor * a_fro * kUnitRoundoff;
  }
  const Preconditioner p = Preconditioner::from_svd(f.v, f.sigma, res.mu);
  res.iteration_floor = iteration_floor(res.condest, coeffs.eta);
  // With an exactly singular sketch the raw estimate is infinite; the step-1
  // rule then uses the regularized spectrum instead.
  const double cond_for_stop =
      std::isfinite(res.condest) ? res.condest
                                 : p.sigma_reg().front() / p.sigma_reg().back();

  auto to_caller = [&](std::span<const double> xs) { return unscale_solution(xs, scaling.norms); };

  // Sketch-and-solve initialization x = V·Σ_reg⁻¹·Uᵀ(Sb).
  Vector x = p.apply(matvec_t(f.u, s.apply(b)));
  res.step_solutions.push_back(to_caller(x));
  std::size_t counter = 0;
  notify(observe, counter, res.step_solutions.back());

  const double be_tol = cfg.be_tol_multiplier * a_fro * kUnitRoundoff;
  const double theta = a_fro / b_norm;

  for (std::size_t step = 0; step < 2; ++step) {
    const Vector r = residual(a, b, x);
    const double x_norm = norm2(x);
    const double r_norm = norm2(r);
    const double step1_tol =
        kUnitRoundoff * (cfg.gamma * res.normest * x_norm + cfg.rho * cond_for_stop * r_norm);

    PolyakOptions opts;
    opts.coeffs = coeffs;
    opts.q_max = cfg.q_max;
    bool step_converged = false;
    opts.stop = [&](std::size_t k, std::span<const double> delta, std::span<const double> y) {
      ++counter;
      const bool want_x = observe || (step == 1 && k % cfg.check_every == 0);
      Vector xhat;
      if (want_x) xhat = add(x, p.apply(y));
      if (observe) observe(counter, to_caller(xhat));
      if (step == 0) {
        if (norm2(delta) <= step1_tol) {
          step_converged = true;
          return true;
        }
        return false;
      }
      if (k % cfg.check_every == 0) {
        const double be = sketched_kw_estimate(f, a, b, xhat, theta);
        res.be_history.push_back(be);
        if (be < be_tol) {
          step_converged = true;
          return true;
        }
      }
      return false;
    };
    OuterStep os = fossils_outer(a, p, r, opts);
    axpy(1.0, os.dx, x);
    res.inner_iterations.push_back(os.inner.iterations);
    res.update_norms.insert(res.update_norms.end(), os.inner.update_norms.begin(),
                            os.inner.update_norms.end());
    res.step_solutions.push_back(to_caller(x));
    res.refinement_steps = step + 1;
    // r = 0 exactly: c = 0 and the inner solver returns immediately.
    if (step == 1) res.converged = step_converged || os.inner.iterations == 0;
  }

  res.x = to_caller(x);
  for (double v : res.x) {
    if (!std::isfinite(v)) fail(ErrorCode::divergence, "fossils: non-finite solution");
  }
  return res;
}

SolveResult fossils_basic(const DenseMatrix& a, std::span<const double> b,
                          const SolverConfig& cfg, std::size_t updates_per_step,
                          const IterateObserver& observe) {
  cfg.validate();
  check_inputs(a, b);
  if (all_zero(b)) {
    SolveResult res = zero_solution(a.cols());
    notify(observe, 0, res.x);
    return res;
  }
  const QrSketch sk = sketch_qr(a, cfg);
  const Preconditioner p = Preconditioner::triangular(sk.qr.r);
  SolveResult res;
  res.sketch_rows = sk.d;
  fill_estimates(res, sk.qr.r);
  const MomentumCoefficients coeffs = cfg.momentum(a.cols(), sk.d);
  res.eta = coeffs.eta;

  Vector x = sketch_and_solve(a, b, sk.s, sk.qr);
  res.step_solutions.push_back(x);
  std::size_t counter = 0;
  notify(observe, counter, x);
  for (std::size_t step = 0; step < 2; ++step) {
    PolyakOptions opts;
    opts.coeffs = coeffs;
    opts.q_max = updates_per_step;
    if (observe) {
      opts.stop = [&](std::size_t, std::span<const double>, std::span<const double> y) {
        observe(++counter, add(x, p.apply(y)));
        return false;
      };
    }
    OuterStep os = fossils_outer(a, p, residual(a, b, x), opts);
    axpy(1.0, os.dx, x);
    res.inner_iterations.push_back(os.inner.iterations);
    res.update_norms.insert(res.update_norms.end(), os.inner.update_norms.begin(),
                            os.inner.update_norms.end());
    res.step_solutions.push_back(x);
    res.refinement_steps = step + 1;
  }
  res.x = x;
  res.converged = true;
  return res;
}

SolveResult iterative_sketching_momentum(const DenseMatrix& a, std::span<const double> b,
                                         const SolverConfig& cfg, std::size_t iters,
                                         const IterateObserver& observe) {
  cfg.validate();
  check_inputs(a, b);
  if (all_zero(b)) {
    SolveResult res = zero_solution(a.cols());
    notify(observe, 0, res.x);
    return res;
  }
  const QrSketch sk = sketch_qr(a, cfg);
  const Preconditioner p = Preconditioner::triangular(sk.qr.r);
  SolveResult res;
  res.sketch_rows = sk.d;
  fill_estimates(res, sk.qr.r);
  const MomentumCoefficients coeffs = cfg.momentum(a.cols(), sk.d);
  res.eta = coeffs.eta;

  Vector x = sketch_and_solve(a, b, sk.s, sk.qr);
  res.step_solutions.push_back(x);
  notify(observe, 0, x);
  const double limit = 1e6 * std::max(norm2(x), norm2(p.apply(p.apply_t(matvec_t(a, b)))));
  Vector x_old = x;
  const std::size_t n = a.cols();
  for (std::size_t k = 1; k <= iters; ++k) {
    const Vector g = p.apply(p.apply_t(matvec_t(a, residual(a, b, x))));
    Vector next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = x[i] + coeffs.alpha * g[i] + coeffs.beta * (x[i] - x_old[i]);
    }
    res.update_norms.push_back(norm2(subtract(next, x)));
    x_old = std::move(x);
    x = std::move(next);
    const double xn = norm2(x);
    if (!std::isfinite(xn) || xn > limit) {
      fail(ErrorCode::divergence, "iterative sketching diverged at iteration " +
                                      std::to_string(k));
    }
    notify(observe, k, x);
  }
  res.inner_iterations.push_back(iters);
  res.refinement_steps = 1;
  res.step_solutions.push_back(x);
  res.x = std::move(x);
  res.converged = true;
  return res;
}

SolveResult sketch_and_precondition(const DenseMatrix& a, std::span<const double> b,
                                    SapInit init, const SolverConfig& cfg, std::size_t iters,
                                    const IterateObserver& observe) {
  cfg.validate();
  check_inputs(a, b);
  if (all_zero(b)) {
    SolveResult res = zero_solution(a.cols());
    notify(observe, 0, res.x);
    return res;
  }
  const QrSketch sk = sketch_qr(a, cfg);
  const Preconditioner p = Preconditioner::triangular(sk.qr.r);
  SolveResult res;
  res.sketch_rows = sk.d;
  fill_estimates(res, sk.qr.r);
  res.eta = cfg.eta(a.cols(), sk.d);

  const Vector x0 = init == SapInit::zero ? Vector(a.cols(), 0.0)
                                          : sketch_and_solve(a, b, sk.s, sk.qr);
  res.step_solutions.push_back(x0);
  notify(observe, 0, x0);
  LsqrOptions opts;
  opts.max_iterations = iters;
  if (observe) {
    opts.observe = [&](std::size_t k, std::span<const double> dx) { observe(k, add(x0, dx)); };
  }
  const LsqrResult lr = lsqr_preconditioned(a, residual(a, b, x0), p, opts);
  res.x = add(x0, lr.dx);
  res.inner_iterations.push_back(lr.iterations);
  res.refinement_steps = 1;
  res.step_solutions.push_back(res.x);
  // A fixed budget is the method; running it out is a normal finish.
  res.converged = lr.converged || lr.iterations == iters;
  return res;
}

SolveResult spir(const DenseMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                 SpirInner inner, std::size_t iters_per_step, const IterateObserver& observe) {
  cfg.validate();
  check_inputs(a, b);
  if (all_zero(b)) {
    SolveResult res = zero_solution(a.cols());
    notify(observe, 0, res.x);
    return res;
  }
  const QrSketch sk = sketch_qr(a, cfg);
  const Preconditioner p = Preconditioner::triangular(sk.qr.r);
  SolveResult res;
  res.sketch_rows = sk.d;
  fill_estimates(res, sk.qr.r);
  res.eta = cfg.eta(a.cols(), sk.d);

  Vector x = sketch_and_solve(a, b, sk.s, sk.qr);
  res.step_solutions.push_back(x);
  std::size_t base = 0;
  notify(observe, 0, x);
  const LinearOperator gram = preconditioned_gram(a, p);

  for (std::size_t step = 0; step < 2; ++step) {
    std::size_t used = 0;
    if (inner == SpirInner::lsqr) {
      LsqrOptions opts;
      opts.max_iterations = iters_per_step;
      if (observe) {
        opts.observe = [&](std::size_t k, std::span<const double> dx) {
          observe(base + k, add(x, dx));
        };
      }
      const LsqrResult lr = lsqr_preconditioned(a, residual(a, b, x), p, opts);
      used = lr.iterations;
      axpy(1.0, lr.dx, x);
    } else {
      const Vector x_start = x;
      x = meta_refine(a, b, x_start, p, [&](std::span<const double> c) {
        CgOptions opts;
        opts.max_iterations = iters_per_step;
        if (observe) {
          opts.observe = [&](std::size_t k, std::span<const double> y) {
            observe(base + k, add(x_start, p.apply(y)));
          };
        }
        InnerResult ir = cg_inner(gram, c, opts);
        used = ir.iterations;
        res.update_norms.insert(res.update_norms.end(), ir.update_norms.begin(),
                                ir.update_norms.end());
        return ir.y;
      });
    }
    base += used;
    res.inner_iterations.push_back(used);
    res.step_solutions.push_back(x);
    res.refinement_steps = step + 1;
  }
  res.x = std::move(x);
  res.converged = true;
  return res;
}

Vector qr_reference_solve(const DenseMatrix& a, std::span<const double> b) {
  check_inputs(a, b);
  const HouseholderQr qr(a);
  Vector qtb = qr.thin_qt(b);
  return tri_solve(qr.r(), qtb, false);
}

}  // namespace fossils
