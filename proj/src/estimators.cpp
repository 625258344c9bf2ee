#include "estimators.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace fossils {

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0)) fail(ErrorCode::parameter, "backward error needs theta > 0");
}

void check_problem(const DenseMatrix& a, std::span<const double> b,
                   std::span<const double> xhat) {
  if (b.size() != a.rows() || xhat.size() != a.cols()) {
    fail(ErrorCode::dimension, "estimator: A is " + std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()) + ", b has " +
                                   std::to_string(b.size()) + ", x has " +
                                   std::to_string(xhat.size()));
  }
}

// Shared evaluation for the plain and sketched estimates; only the factors differ.
double kw_from_factors(const SvdFactorization& f, const DenseMatrix& a,
                       std::span<const double> b, std::span<const double> xhat, double theta) {
  check_theta(theta);
  check_problem(a, b, xhat);
  if (f.v.rows() != a.cols() || f.sigma.size() != a.cols()) {
    fail(ErrorCode::dimension, "estimator: factorization does not match A's column count");
  }
  const Vector r = residual(a, b, xhat);
  const double xnorm = norm2(xhat);
  const double rnorm = norm2(r);
  // θ/√(1+θ²‖x̂‖²) = 1/√(θ⁻² + ‖x̂‖²); the form covers θ = ∞ as well.
  const double inv_theta2 = std::isinf(theta) ? 0.0 : 1.0 / (theta * theta);
  const double denom = inv_theta2 + xnorm * xnorm;
  if (denom == 0.0) fail(ErrorCode::parameter, "backward error with theta = inf needs x != 0");
  const double coef = 1.0 / std::sqrt(denom);
  const double shift = rnorm * rnorm / denom;

  const Vector w = matvec_t(f.v, matvec_t(a, r));
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double s = f.sigma[i] * f.sigma[i] + shift;
    // σᵢ = 0 with zero residual: Aᵀr has no component along a null vector.
    if (s == 0.0) continue;
    sum += w[i] * w[i] / s;
  }
  return coef * std::sqrt(sum);
}

}  // namespace

double kw_estimate(const SvdFactorization& a_svd, const DenseMatrix& a,
                   std::span<const double> b, std::span<const double> xhat, double theta) {
  return kw_from_factors(a_svd, a, b, xhat, theta);
}

double sketched_kw_estimate(const SvdFactorization& sa_svd, const DenseMatrix& a,
                            std::span<const double> b, std::span<const double> xhat,
                            double theta) {
  return kw_from_factors(sa_svd, a, b, xhat, theta);
}

double residual_orthogonality(const DenseMatrix& a, std::span<const double> b,
                              std::span<const double> xhat) {
  check_problem(a, b, xhat);
  return norm2(matvec_t(a, residual(a, b, xhat)));
}

ComponentwiseReport componentwise_backward_check(const SvdFactorization& a_svd,
                                                 const DenseMatrix& a,
                                                 std::span<const double> b,
                                                 std::span<const double> x,
                                                 std::span<const double> xhat, double eps,
                                                 double slack) {
  check_problem(a, b, xhat);
  if (x.size() != xhat.size()) fail(ErrorCode::dimension, "componentwise check: x size");
  if (!(eps > 0.0) || !(slack > 0.0)) {
    fail(ErrorCode::parameter, "componentwise check needs eps > 0 and slack > 0");
  }
  const double a_norm = a_svd.sigma.front();
  const double b_norm = norm2(b);
  if (a_norm == 0.0 || b_norm == 0.0) {
    fail(ErrorCode::parameter, "componentwise check needs nonzero A and b");
  }
  // Normalized problem: A' = A/‖A‖, b' = b/‖b‖, x' = x·‖A‖/‖b‖.
  const double x_scale = a_norm / b_norm;
  const Vector r = residual(a, b, xhat);
  const double r_norm = norm2(r) / b_norm;
  const double xhat_norm = norm2(xhat) * x_scale;
  const Vector diff = subtract(xhat, x);
  const Vector comps = matvec_t(a_svd.v, diff);

  ComponentwiseReport report;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    DirectionCheck dc;
    dc.index = i;
    dc.error_component = std::abs(comps[i]) * x_scale;
    const double s = a_svd.sigma[i] / a_norm;
    if (s == 0.0) {
      dc.skipped = true;
      ++report.skipped;
    } else {
      dc.bound = slack * ((1.0 + xhat_norm) * eps / s + r_norm * eps / (s * s));
      dc.pass = dc.error_component <= dc.bound;
      report.pass = report.pass && dc.pass;
    }
    report.directions.push_back(dc);
  }
  return report;
}

ErrorReport error_metrics(const DenseMatrix& a, std::span<const double> b,
                          std::span<const double> x_true, std::span<const double> xhat,
                          const SvdFactorization& sa_svd, const SvdFactorization* a_svd,
                          double theta) {
  check_problem(a, b, xhat);
  if (x_true.size() != xhat.size()) fail(ErrorCode::dimension, "error_metrics: x_true size");
  ErrorReport rep;
  rep.theta = theta;
  const Vector diff = subtract(x_true, xhat);
  rep.forward_err = norm2(diff);
  rep.residual_err = norm2(matvec(a, diff));
  if (a_svd != nullptr) rep.kw = kw_estimate(*a_svd, a, b, xhat, theta);
  rep.kw_sketched = sketched_kw_estimate(sa_svd, a, b, xhat, theta);
  rep.resid_orth = residual_orthogonality(a, b, xhat);
  return rep;
}

// ---------------------------------------------------------------------------

Evaluator::Evaluator(const DenseMatrix& a, std::span<const double> b,
                     std::optional<std::span<const double>> x_true,
                     const EvaluatorOptions& options)
    : a_(a), b_(b.begin(), b.end()) {
  if (b.size() != a.rows()) fail(ErrorCode::dimension, "evaluator: b does not match A");
  if (x_true && x_true->size() != a.cols()) {
    fail(ErrorCode::dimension, "evaluator: x_true does not match A");
  }
  if (x_true) x_true_.assign(x_true->begin(), x_true->end());
  const double an = spectral_norm(a_);
  const double bn = norm2(b_);
  a_scale_ = an > 0.0 ? an : 1.0;
  b_scale_ = bn > 0.0 ? bn : 1.0;

  const std::size_t n = a.cols();
  const std::size_t d = std::max<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(options.d_factor * static_cast<double>(n))));
  Rng rng(options.seed);
  const SparseSignEmbedding s =
      SparseSignEmbedding::draw(a.rows(), d, std::min(options.zeta, d), rng);
  sa_svd_ = svd(s.apply(a_));
  if (options.exact_kw) a_svd_ = svd(a_);
}

// The data is never rescaled (that would round A). Instead, with α = ‖A‖ and
// β = ‖b‖, BE_1 of the normalized problem equals BE_θ(A, b)/α at θ = α/β, and
// the other metrics pick up the matching powers of α and β.
ErrorReport Evaluator::measure(std::span<const double> xhat) const {
  const double theta = a_scale_ / b_scale_;
  ErrorReport rep;
  if (has_reference()) {
    rep = error_metrics(a_, b_, x_true_, xhat, sa_svd_, a_svd_ ? &*a_svd_ : nullptr, theta);
    rep.forward_err *= a_scale_ / b_scale_;
    rep.residual_err /= b_scale_;
  } else {
    rep.forward_err = std::nan("");
    rep.residual_err = std::nan("");
    if (a_svd_) rep.kw = kw_estimate(*a_svd_, a_, b_, xhat, theta);
    rep.kw_sketched = sketched_kw_estimate(sa_svd_, a_, b_, xhat, theta);
    rep.resid_orth = residual_orthogonality(a_, b_, xhat);
  }
  if (rep.kw) *rep.kw /= a_scale_;
  rep.kw_sketched /= a_scale_;
  rep.resid_orth /= a_scale_ * b_scale_;
  rep.theta = 1.0;
  return rep;
}

}  // namespace fossils
