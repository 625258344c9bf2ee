#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace fossils {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::singular: return "singular";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::breakdown: return "breakdown";
    case ErrorCode::parse: return "parse";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require_length(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    fail(ErrorCode::dimension, std::string(what) + ": expected length " + std::to_string(n) +
                                   ", got " + std::to_string(v.size()));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> colmajor)
    : rows_(rows), cols_(cols), data_(std::move(colmajor)) {
  if (data_.size() != rows * cols) {
    fail(ErrorCode::dimension, "matrix data length " + std::to_string(data_.size()) +
                                   " does not match shape " + shape(rows, cols));
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.begin()->size();
  DenseMatrix a(m, n);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != n) fail(ErrorCode::dimension, "ragged row literal");
    std::size_t j = 0;
    for (double v : row) a(i, j++) = v;
    ++i;
  }
  return a;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  return a;
}

DenseMatrix DenseMatrix::column(std::span<const double> v) {
  return DenseMatrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// Four interleaved partial sums, as in unrolled BLAS kernels; this also keeps
// the rounding error growth well below that of one long running sum.
double dot(std::span<const double> x, std::span<const double> y) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < n; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  if (std::isfinite(s) && s > 1e-280) return std::sqrt(s);
  // Rescaled pass for tiny or huge entries.
  double big = 0.0;
  for (double v : x) big = std::max(big, std::abs(v));
  if (big == 0.0 || !std::isfinite(big)) return big;
  s = 0.0;
  for (double v : x) {
    const double t = v / big;
    s += t * t;
  }
  return big * std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

Vector subtract(std::span<const double> x, std::span<const double> y) {
  require_length(y, x.size(), "subtract");
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
  return z;
}

Vector add(std::span<const double> x, std::span<const double> y) {
  require_length(y, x.size(), "add");
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
  return z;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  require_length(x, a.cols(), "matvec");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) axpy(x[j], a.col(j), y);
  return y;
}

Vector matvec_t(const DenseMatrix& a, std::span<const double> x) {
  require_length(x, a.rows(), "matvec_t");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

Vector residual(const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  require_length(b, a.rows(), "residual");
  Vector r(b.begin(), b.end());
  Vector ax = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
  return r;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorCode::dimension,
         "matmul: " + shape(a.rows(), a.cols()) + " times " + shape(b.rows(), b.cols()));
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(b(k, j), a.col(k), c.col(j));
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    fail(ErrorCode::dimension,
         "matmul_tn: " + shape(a.rows(), a.cols()) + "^T times " + shape(b.rows(), b.cols()));
  }
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.col(i), b.col(j));
  return c;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::dimension,
         "subtract: " + shape(a.rows(), a.cols()) + " vs " + shape(b.rows(), b.cols()));
  }
  DenseMatrix c = a;
  for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] -= b.data()[k];
  return c;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

double orthogonality_loss(const DenseMatrix& q) {
  DenseMatrix g = matmul_tn(q, q);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

Vector Rng::normal_vector(std::size_t n) {
  Vector v(n);
  for (double& x : v) x = normal();
  return v;
}

DenseMatrix Rng::normal_matrix(std::size_t rows, std::size_t cols) {
  DenseMatrix a(rows, cols);
  for (double& x : a.data()) x = normal();
  return a;
}

// ---------------------------------------------------------------------------
// Householder QR

HouseholderQr::HouseholderQr(DenseMatrix a)
    : packed_(std::move(a)), tau_(packed_.cols(), 0.0), sign_(packed_.cols(), 1.0) {
  const std::size_t m = packed_.rows();
  const std::size_t n = packed_.cols();
  if (m < n) fail(ErrorCode::dimension, "householder_qr needs rows >= cols, got " + shape(m, n));
  if (!packed_.all_finite()) fail(ErrorCode::parameter, "householder_qr: non-finite entry");

  for (std::size_t j = 0; j < n; ++j) {
    std::span<double> x = packed_.col(j).subspan(j);
    const double alpha = x[0];
    const double tail = norm2(x.subspan(1));
    if (tail == 0.0) {
      tau_[j] = 0.0;
    } else {
      const double beta = -std::copysign(std::hypot(alpha, tail), alpha);
      tau_[j] = (beta - alpha) / beta;
      scale(1.0 / (alpha - beta), x.subspan(1));
      x[0] = beta;
      for (std::size_t k = j + 1; k < n; ++k) {
        std::span<double> y = packed_.col(k).subspan(j);
        const double w = y[0] + dot(x.subspan(1), y.subspan(1));
        y[0] -= tau_[j] * w;
        axpy(-tau_[j] * w, x.subspan(1), y.subspan(1));
      }
    }
    sign_[j] = x[0] < 0.0 ? -1.0 : 1.0;
  }
}

DenseMatrix HouseholderQr::r() const {
  const std::size_t n = cols();
  DenseMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i <= k; ++i) r(i, k) = sign_[i] * packed_(i, k);
  return r;
}

DenseMatrix HouseholderQr::thin_q() const {
  const std::size_t m = rows();
  const std::size_t n = cols();
  DenseMatrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    if (tau_[jj] == 0.0) continue;
    std::span<const double> v = packed_.col(jj).subspan(jj + 1);
    for (std::size_t k = jj; k < n; ++k) {
      std::span<double> y = q.col(k).subspan(jj);
      const double w = y[0] + dot(v, y.subspan(1));
      y[0] -= tau_[jj] * w;
      axpy(-tau_[jj] * w, v, y.subspan(1));
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (sign_[j] < 0.0) scale(-1.0, q.col(j));
  return q;
}

void HouseholderQr::apply_qt(std::span<double> v) const {
  require_length(v, rows(), "apply_qt");
  const std::size_t n = cols();
  for (std::size_t j = 0; j < n; ++j) {
    if (tau_[j] == 0.0) continue;
    std::span<const double> h = packed_.col(j).subspan(j + 1);
    std::span<double> y = v.subspan(j);
    const double w = y[0] + dot(h, y.subspan(1));
    y[0] -= tau_[j] * w;
    axpy(-tau_[j] * w, h, y.subspan(1));
  }
  for (std::size_t j = 0; j < n; ++j) v[j] *= sign_[j];
}

Vector HouseholderQr::thin_qt(std::span<const double> v) const {
  Vector w(v.begin(), v.end());
  apply_qt(w);
  w.resize(cols());
  return w;
}

QrFactorization householder_qr(const DenseMatrix& a) {
  HouseholderQr qr(a);
  return {qr.thin_q(), qr.r()};
}

// ---------------------------------------------------------------------------
// SVD

namespace {

constexpr int kMaxJacobiSweeps = 80;

// Fills the columns flagged in `missing` with unit vectors orthogonal to every
// other column of the n×n matrix u (classical Gram-Schmidt, applied twice).
void complete_orthonormal(DenseMatrix& u, const std::vector<bool>& missing) {
  const std::size_t n = u.rows();
  std::vector<bool> have(u.cols());
  for (std::size_t j = 0; j < u.cols(); ++j) have[j] = !missing[j];
  std::size_t next_candidate = 0;
  for (std::size_t j = 0; j < u.cols(); ++j) {
    if (have[j]) continue;
    while (next_candidate < n) {
      Vector e(n, 0.0);
      e[next_candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < u.cols(); ++k)
          if (have[k]) axpy(-dot(u.col(k), e), u.col(k), e);
      const double nrm = norm2(e);
      if (nrm > 0.5) {
        scale(1.0 / nrm, e);
        std::copy(e.begin(), e.end(), u.col(j).begin());
        have[j] = true;
        break;
      }
    }
  }
}

}  // namespace

SvdFactorization svd(const DenseMatrix& b) {
  const std::size_t d = b.rows();
  const std::size_t n = b.cols();
  if (d < n) fail(ErrorCode::dimension, "svd needs rows >= cols, got " + shape(d, n));
  if (n == 0) fail(ErrorCode::dimension, "svd of an empty matrix");

  HouseholderQr qr(b);
  DenseMatrix w = qr.r();
  DenseMatrix v = DenseMatrix::identity(n);

  const double tol = kUnitRoundoff * static_cast<double>(std::max<std::size_t>(n, 2));
  // Columns below this are rounding debris from exact rank deficiency. Left in, they
  // shrink by about u per sweep without ever passing the relative test.
  const double negligible = kUnitRoundoff * kUnitRoundoff * frobenius_norm(w);
  const double negligible_sq = negligible * negligible;
  bool converged = n == 1;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        std::span<double> wp = w.col(p);
        std::span<double> wq = w.col(q);
        const double alpha = dot(wp, wp);
        const double beta = dot(wq, wq);
        const double gamma = dot(wp, wq);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        if (alpha <= negligible_sq || beta <= negligible_sq) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double a0 = wp[k];
          wp[k] = c * a0 - s * wq[k];
          wq[k] = s * a0 + c * wq[k];
        }
        std::span<double> vp = v.col(p);
        std::span<double> vq = v.col(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double a0 = vp[k];
          vp[k] = c * a0 - s * vq[k];
          vq[k] = s * a0 + c * vq[k];
        }
      }
    }
  }
  if (!converged) {
    fail(ErrorCode::convergence,
         "svd: one-sided Jacobi did not converge in " + std::to_string(kMaxJacobiSweeps) +
             " sweeps");
  }

  Vector norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    norms[j] = norm2(w.col(j));
    if (norms[j] <= negligible) norms[j] = 0.0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });

  SvdFactorization out;
  out.sigma.resize(n);
  out.v = DenseMatrix(n, n);
  DenseMatrix u_small(n, n);
  std::vector<bool> missing(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    std::copy(v.col(j).begin(), v.col(j).end(), out.v.col(k).begin());
    if (norms[j] > 0.0) {
      for (std::size_t i = 0; i < n; ++i) u_small(i, k) = w(i, j) / norms[j];
    } else {
      missing[k] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end())
    complete_orthonormal(u_small, missing);

  // U = Q_thin · U_small, by applying the reflectors to [U_small; 0].
  DenseMatrix q = qr.thin_q();
  out.u = matmul(q, u_small);
  return out;
}

Vector singular_values(const DenseMatrix& b) {
  if (b.rows() < b.cols()) return svd(b.transposed()).sigma;
  return svd(b).sigma;
}

double spectral_norm(const DenseMatrix& a) {
  if (a.empty()) return 0.0;
  return singular_values(a).front();
}

// ---------------------------------------------------------------------------

Vector tri_solve(const DenseMatrix& r, std::span<const double> z, bool transposed) {
  const std::size_t n = r.rows();
  if (r.cols() != n) fail(ErrorCode::dimension, "tri_solve: R is " + shape(n, r.cols()));
  require_length(z, n, "tri_solve");
  for (std::size_t i = 0; i < n; ++i) {
    if (r(i, i) == 0.0) {
      fail(ErrorCode::singular, "tri_solve: zero diagonal entry at " + std::to_string(i));
    }
  }
  Vector x(z.begin(), z.end());
  if (!transposed) {
    // Column-oriented back substitution.
    for (std::size_t j = n; j-- > 0;) {
      x[j] /= r(j, j);
      const double xj = x[j];
      for (std::size_t i = 0; i < j; ++i) x[i] -= r(i, j) * xj;
    }
  } else {
    // Rᵀ is lower triangular; row i of Rᵀ is column i of R.
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= r(k, i) * x[k];
      x[i] = s / r(i, i);
    }
  }
  return x;
}

DenseMatrix haar_orthonormal(std::size_t m, std::size_t n, Rng& rng) {
  if (m < n) fail(ErrorCode::dimension, "haar_orthonormal needs m >= n, got " + shape(m, n));
  if (n == 0) fail(ErrorCode::dimension, "haar_orthonormal needs n >= 1");
  // The nonnegative-diagonal QR convention is exactly the sign correction that
  // makes Q Haar distributed.
  return HouseholderQr(rng.normal_matrix(m, n)).thin_q();
}

}  // namespace fossils
