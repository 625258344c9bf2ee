#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linalg.hpp"

namespace fossils {

/// Sparse sign embedding S ∈ ℝ^{d×m}: every column holds exactly ζ nonzeros
/// ±ζ^{-1/2} at distinct rows. Stored column-compressed so S·A streams over
/// the rows of A once.
class SparseSignEmbedding {
 public:
  /// rows[i*zeta + t] and signs[i*zeta + t] describe nonzero t of column i.
  SparseSignEmbedding(std::size_t d, std::size_t m, std::size_t zeta,
                      std::vector<std::uint32_t> rows, std::vector<std::int8_t> signs);

  static SparseSignEmbedding draw(std::size_t m, std::size_t d, std::size_t zeta, Rng& rng);

  std::size_t output_dim() const noexcept { return d_; }
  std::size_t input_dim() const noexcept { return m_; }
  std::size_t zeta() const noexcept { return zeta_; }
  double scale() const noexcept { return scale_; }

  std::span<const std::uint32_t> column_rows(std::size_t i) const {
    return {rows_.data() + i * zeta_, zeta_};
  }
  std::span<const std::int8_t> column_signs(std::size_t i) const {
    return {signs_.data() + i * zeta_, zeta_};
  }

  DenseMatrix apply(const DenseMatrix& x) const;
  Vector apply(std::span<const double> x) const;
  DenseMatrix to_dense() const;

 private:
  std::size_t d_;
  std::size_t m_;
  std::size_t zeta_;
  double scale_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::int8_t> signs_;
};

inline SparseSignEmbedding make_sparse_sign(std::size_t m, std::size_t d, std::size_t zeta,
                                            Rng& rng) {
  return SparseSignEmbedding::draw(m, d, zeta, rng);
}

/// max(1 − σ_min(S·Q), σ_max(S·Q) − 1) for Q with orthonormal columns.
double estimate_distortion(const SparseSignEmbedding& s, const DenseMatrix& basis);

}  // namespace fossils
