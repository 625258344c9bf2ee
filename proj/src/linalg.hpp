#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace fossils {

/// Unit roundoff of IEEE binary64, 2^-53.
inline constexpr double kUnitRoundoff = 0x1p-53;

using Vector = std::vector<double>;

/// Dense real matrix stored column-major.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> colmajor);

  /// Row-wise literal, handy in tests: {{1, 2}, {3, 4}}.
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const noexcept {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transposed() const;
  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Level-1/2/3 kernels. Single-threaded and deterministic.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
Vector subtract(std::span<const double> x, std::span<const double> y);
Vector add(std::span<const double> x, std::span<const double> y);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_t(const DenseMatrix& a, std::span<const double> x);
/// b - A x
Vector residual(const DenseMatrix& a, std::span<const double> b, std::span<const double> x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// Aᵀ B without forming the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& a);
/// ‖QᵀQ − I‖_F for a matrix with (nominally) orthonormal columns.
double orthogonality_loss(const DenseMatrix& q);

/// Seeded 64-bit generator. All randomness in the library flows through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool coin() { return (engine_() >> 63) != 0; }
  std::uint64_t next() { return engine_(); }

  Vector normal_vector(std::size_t n);
  DenseMatrix normal_matrix(std::size_t rows, std::size_t cols);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct QrFactorization {
  DenseMatrix q;  // m×n, orthonormal columns
  DenseMatrix r;  // n×n, upper triangular, nonnegative diagonal
};

/// Householder QR kept in compact (reflector) form. The diagonal of R is made
/// nonnegative, so the factorization is unique for full-rank input.
class HouseholderQr {
 public:
  explicit HouseholderQr(DenseMatrix a);

  std::size_t rows() const noexcept { return packed_.rows(); }
  std::size_t cols() const noexcept { return packed_.cols(); }

  DenseMatrix r() const;
  DenseMatrix thin_q() const;
  /// Overwrites v (length m) with Qᵀv; only the first n entries are meaningful
  /// for the thin factor.
  void apply_qt(std::span<double> v) const;
  /// First n entries of Qᵀv.
  Vector thin_qt(std::span<const double> v) const;

 private:
  DenseMatrix packed_;        // reflectors below the diagonal, R on and above
  std::vector<double> tau_;
  std::vector<double> sign_;  // ±1 column flips that make diag(R) ≥ 0
};

QrFactorization householder_qr(const DenseMatrix& a);

struct SvdFactorization {
  DenseMatrix u;  // d×n, orthonormal columns
  Vector sigma;   // n values, nonincreasing, nonnegative
  DenseMatrix v;  // n×n, orthogonal
};

/// Thin SVD of a d×n matrix with d ≥ n: Householder QR followed by one-sided
/// Jacobi on the triangular factor.
SvdFactorization svd(const DenseMatrix& b);
Vector singular_values(const DenseMatrix& b);
/// Largest singular value; works for either orientation.
double spectral_norm(const DenseMatrix& a);

/// R⁻¹z, or R⁻ᵀz when transposed, for upper-triangular R.
Vector tri_solve(const DenseMatrix& r, std::span<const double> z, bool transposed = false);

/// Haar-distributed m×n matrix with orthonormal columns.
DenseMatrix haar_orthonormal(std::size_t m, std::size_t n, Rng& rng);

}  // namespace fossils
