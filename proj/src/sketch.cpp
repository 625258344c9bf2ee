#include "sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace fossils {

SparseSignEmbedding::SparseSignEmbedding(std::size_t d, std::size_t m, std::size_t zeta,
                                         std::vector<std::uint32_t> rows,
                                         std::vector<std::int8_t> signs)
    : d_(d), m_(m), zeta_(zeta), rows_(std::move(rows)), signs_(std::move(signs)) {
  if (d == 0 || m == 0) fail(ErrorCode::parameter, "sparse sign embedding needs d, m >= 1");
  if (zeta == 0 || zeta > d) {
    fail(ErrorCode::parameter, "sparse sign embedding needs 1 <= zeta <= d (zeta=" +
                                   std::to_string(zeta) + ", d=" + std::to_string(d) + ")");
  }
  if (rows_.size() != m * zeta || signs_.size() != m * zeta) {
    fail(ErrorCode::dimension, "sparse sign embedding: storage does not match m*zeta");
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::uint32_t> col(rows_.begin() + i * zeta, rows_.begin() + (i + 1) * zeta);
    std::sort(col.begin(), col.end());
    if (col.back() >= d || std::adjacent_find(col.begin(), col.end()) != col.end()) {
      fail(ErrorCode::parameter, "sparse sign embedding: column " + std::to_string(i) +
                                     " has repeated or out-of-range rows");
    }
  }
  for (std::int8_t s : signs_) {
    if (s != 1 && s != -1) fail(ErrorCode::parameter, "sparse sign embedding: sign not +-1");
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(zeta));
}

SparseSignEmbedding SparseSignEmbedding::draw(std::size_t m, std::size_t d, std::size_t zeta,
                                              Rng& rng) {
  if (d == 0 || m == 0) fail(ErrorCode::parameter, "sparse sign embedding needs d, m >= 1");
  if (zeta == 0 || zeta > d) {
    fail(ErrorCode::parameter, "sparse sign embedding needs 1 <= zeta <= d (zeta=" +
                                   std::to_string(zeta) + ", d=" + std::to_string(d) + ")");
  }
  std::vector<std::uint32_t> rows(m * zeta);
  std::vector<std::int8_t> signs(m * zeta);
  // Partial Fisher-Yates on a persistent permutation: each column takes the
  // first zeta slots after zeta random swaps, which is a uniform zeta-subset
  // regardless of the permutation it starts from.
  std::vector<std::uint32_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < zeta; ++t) {
      const std::size_t k = t + rng.below(d - t);
      std::swap(perm[t], perm[k]);
      rows[i * zeta + t] = perm[t];
      signs[i * zeta + t] = rng.coin() ? 1 : -1;
    }
  }
  return SparseSignEmbedding(d, m, zeta, std::move(rows), std::move(signs));
}

DenseMatrix SparseSignEmbedding::apply(const DenseMatrix& x) const {
  if (x.rows() != m_) {
    fail(ErrorCode::dimension, "sketch apply: embedding takes " + std::to_string(m_) +
                                   " rows, input has " + std::to_string(x.rows()));
  }
  DenseMatrix out(d_, x.cols());
  for (std::size_t k = 0; k < x.cols(); ++k) {
    std::span<const double> xk = x.col(k);
    std::span<double> ok = out.col(k);
    for (std::size_t i = 0; i < m_; ++i) {
      const double v = scale_ * xk[i];
      const std::uint32_t* r = rows_.data() + i * zeta_;
      const std::int8_t* s = signs_.data() + i * zeta_;
      for (std::size_t t = 0; t < zeta_; ++t) ok[r[t]] += s[t] > 0 ? v : -v;
    }
  }
  return out;
}

Vector SparseSignEmbedding::apply(std::span<const double> x) const {
  DenseMatrix sx = apply(DenseMatrix::column(x));
  return Vector(sx.data().begin(), sx.data().end());
}

DenseMatrix SparseSignEmbedding::to_dense() const {
  DenseMatrix s(d_, m_);
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t t = 0; t < zeta_; ++t)
      s(rows_[i * zeta_ + t], i) = signs_[i * zeta_ + t] * scale_;
  return s;
}

double estimate_distortion(const SparseSignEmbedding& s, const DenseMatrix& basis) {
  const Vector sigma = singular_values(s.apply(basis));
  // Fewer sketch rows than basis columns: S·Q has a nontrivial null space.
  const double smallest = s.output_dim() < basis.cols() ? 0.0 : sigma.back();
  return std::max(1.0 - smallest, sigma.front() - 1.0);
}

}  // namespace fossils
