#include "inner.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace fossils {

Preconditioner Preconditioner::triangular(DenseMatrix r) {
  if (r.rows() != r.cols()) fail(ErrorCode::dimension, "triangular preconditioner must be square");
  for (std::size_t i = 0; i < r.rows(); ++i) {
    if (!(r(i, i) > 0.0)) {
      fail(ErrorCode::singular,
           "triangular preconditioner: diagonal entry " + std::to_string(i) + " is not positive");
    }
  }
  Preconditioner p;
  p.kind_ = Kind::triangular;
  p.r_ = std::move(r);
  return p;
}

Preconditioner Preconditioner::from_svd(DenseMatrix v, std::span<const double> sigma, double mu) {
  if (v.rows() != v.cols() || sigma.size() != v.cols()) {
    fail(ErrorCode::dimension, "svd preconditioner: V and sigma sizes disagree");
  }
  if (!(mu >= 0.0)) fail(ErrorCode::parameter, "svd preconditioner: mu must be >= 0");
  Preconditioner p;
  p.kind_ = Kind::svd;
  p.v_ = std::move(v);
  p.mu_ = mu;
  p.sigma_reg_.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    p.sigma_reg_[i] = mu > 0.0 ? std::hypot(sigma[i], mu) : sigma[i];
    if (!(p.sigma_reg_[i] > 0.0)) {
      fail(ErrorCode::singular, "svd preconditioner: singular value " + std::to_string(i) +
                                    " is zero and no regularization was requested");
    }
  }
  return p;
}

Vector Preconditioner::apply(std::span<const double> z) const {
  if (kind_ == Kind::triangular) return tri_solve(r_, z, false);
  Vector w(z.begin(), z.end());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] /= sigma_reg_[i];
  return matvec(v_, w);
}

Vector Preconditioner::apply_t(std::span<const double> z) const {
  if (kind_ == Kind::triangular) return tri_solve(r_, z, true);
  Vector w = matvec_t(v_, z);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] /= sigma_reg_[i];
  return w;
}

LinearOperator preconditioned_gram(const DenseMatrix& a, const Preconditioner& p) {
  return [&a, &p](std::span<const double> y) {
    const Vector z = p.apply(y);
    Vector g = p.apply_t(matvec_t(a, matvec(a, z)));
    const double mu2 = p.mu() * p.mu();
    if (mu2 > 0.0) axpy(mu2, p.apply_t(z), g);
    return g;
  };
}

MomentumCoefficients MomentumCoefficients::from_distortion(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    fail(ErrorCode::parameter, "distortion must lie in [0, 1), got " + std::to_string(eta));
  }
  const double beta = eta * eta;
  return {eta, (1.0 - beta) * (1.0 - beta), beta};
}

InnerResult polyak_inner(const LinearOperator& gram, std::span<const double> c,
                         const PolyakOptions& options) {
  const std::size_t n = c.size();
  const double cnorm = norm2(c);
  const double alpha = options.coeffs.alpha;
  const double beta = options.coeffs.beta;

  InnerResult out;
  out.y.assign(c.begin(), c.end());
  Vector y_old = out.y;
  Vector delta(n);
  if (cnorm == 0.0) return out;

  for (std::size_t k = 1; k <= options.q_max; ++k) {
    const Vector g = gram(out.y);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = alpha * (c[i] - g[i]) + beta * (out.y[i] - y_old[i]);
    }
    y_old = out.y;
    axpy(1.0, delta, out.y);
    if (options.perturb) options.perturb(k, out.y);
    out.iterations = k;
    const double dn = norm2(delta);
    out.update_norms.push_back(dn);

    const double yn = norm2(out.y);
    if (!std::isfinite(yn) || yn > options.divergence_factor * cnorm) {
      fail(ErrorCode::divergence, "heavy-ball iteration diverged at update " + std::to_string(k) +
                                      " (|y| = " + std::to_string(yn) + ")");
    }
    if (options.stop && options.stop(k, delta, out.y)) {
      out.stopped = true;
      break;
    }
  }
  return out;
}

InnerResult cg_inner(const LinearOperator& gram, std::span<const double> c,
                     const CgOptions& options) {
  const std::size_t n = c.size();
  InnerResult out;
  out.y.assign(n, 0.0);
  Vector r(c.begin(), c.end());
  Vector p = r;
  double rr = dot(r, r);
  const double cnorm = std::sqrt(rr);
  if (cnorm == 0.0) {
    out.stopped = true;
    return out;
  }
  for (std::size_t k = 1; k <= options.max_iterations; ++k) {
    const Vector gp = gram(p);
    const double curvature = dot(p, gp);
    if (!(curvature > 0.0)) {
      fail(ErrorCode::breakdown, "conjugate gradient: nonpositive curvature at iteration " +
                                     std::to_string(k) + "; operator not positive definite");
    }
    const double step = rr / curvature;
    axpy(step, p, out.y);
    axpy(-step, gp, r);
    out.iterations = k;
    out.update_norms.push_back(std::abs(step) * norm2(p));
    if (options.observe) options.observe(k, out.y);
    const double rr_new = dot(r, r);
    if (std::sqrt(rr_new) <= options.tol * cnorm) {
      out.stopped = true;
      break;
    }
    const double ratio = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + ratio * p[i];
  }
  return out;
}

LsqrResult lsqr_preconditioned(const DenseMatrix& a, std::span<const double> r,
                               const Preconditioner& p, const LsqrOptions& options) {
  if (r.size() != a.rows()) fail(ErrorCode::dimension, "lsqr: residual length mismatch");
  if (p.dim() != a.cols()) fail(ErrorCode::dimension, "lsqr: preconditioner size mismatch");
  const std::size_t n = a.cols();
  LsqrResult out;
  out.dx.assign(n, 0.0);

  Vector u(r.begin(), r.end());
  double beta = norm2(u);
  if (beta == 0.0) {
    out.converged = true;
    return out;
  }
  scale(1.0 / beta, u);
  Vector v = p.apply_t(matvec_t(a, u));
  double alpha = norm2(v);
  if (alpha == 0.0) {
    out.converged = true;
    return out;
  }
  scale(1.0 / alpha, v);
  Vector pv = p.apply(v);
  Vector dir = pv;  // P·(search direction)
  double phibar = beta;
  double rhobar = alpha;
  double bnorm2 = alpha * alpha;  // running ‖AP‖_F² estimate

  for (std::size_t k = 1; k <= options.max_iterations; ++k) {
    // Bidiagonalization step on B = AP.
    Vector au = matvec(a, pv);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = au[i] - alpha * u[i];
    beta = norm2(u);
    if (beta > 0.0) scale(1.0 / beta, u);
    double alpha_next = 0.0;
    Vector pv_next;
    if (beta > 0.0) {
      Vector atu = p.apply_t(matvec_t(a, u));
      for (std::size_t i = 0; i < n; ++i) v[i] = atu[i] - beta * v[i];
      alpha_next = norm2(v);
      if (alpha_next > 0.0) {
        scale(1.0 / alpha_next, v);
        pv_next = p.apply(v);
      }
    }
    bnorm2 += beta * beta + alpha_next * alpha_next;

    // Plane rotation eliminating the subdiagonal β.
    const double rho = std::hypot(rhobar, beta);
    const double cs = rhobar / rho;
    const double sn = beta / rho;
    const double theta = sn * alpha_next;
    rhobar = -cs * alpha_next;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    axpy(phi / rho, dir, out.dx);
    out.iterations = k;
    if (options.observe) options.observe(k, out.dx);

    if (beta == 0.0 || alpha_next == 0.0) {
      out.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) dir[i] = pv_next[i] - (theta / rho) * dir[i];
    pv = std::move(pv_next);
    alpha = alpha_next;

    if (options.atol > 0.0) {
      const double arnorm = phibar * alpha_next * std::abs(cs);
      if (arnorm <= options.atol * std::sqrt(bnorm2) * phibar) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

Vector meta_refine(const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
                   const Preconditioner& p,
                   const std::function<Vector(std::span<const double>)>& inner) {
  const Vector c = p.apply_t(matvec_t(a, residual(a, b, x0)));
  const Vector y = inner(c);
  return add(x0, p.apply(y));
}

OuterStep fossils_outer(const DenseMatrix& a, const Preconditioner& p,
                        std::span<const double> r0, const PolyakOptions& options) {
  if (r0.size() != a.rows()) fail(ErrorCode::dimension, "fossils_outer: residual length");
  const Vector c = p.apply_t(matvec_t(a, r0));
  OuterStep step;
  step.inner = polyak_inner(preconditioned_gram(a, p), c, options);
  step.dx = p.apply(step.inner.y);
  return step;
}

}  // namespace fossils
