#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"
#include "oracles.hpp"
#include "sketch.hpp"

using namespace fossils;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

TEST(SparseSign, FullColumnsWhenZetaEqualsD) {
  Rng rng(1);
  const SparseSignEmbedding s = make_sparse_sign(2, 3, 3, rng);
  const DenseMatrix d = s.to_dense();
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(d(i, j)), 1.0 / std::sqrt(3.0), 1e-16);
}

TEST(SparseSign, ColumnStructure) {
  Rng rng(2);
  const SparseSignEmbedding s = make_sparse_sign(100, 600, 8, rng);
  const DenseMatrix d = s.to_dense();
  for (std::size_t j = 0; j < 100; ++j) {
    std::set<std::uint32_t> rows(s.column_rows(j).begin(), s.column_rows(j).end());
    EXPECT_EQ(rows.size(), 8u);
    int nnz = 0;
    double sq = 0.0;
    for (std::size_t i = 0; i < 600; ++i) {
      if (d(i, j) != 0.0) {
        ++nnz;
        EXPECT_DOUBLE_EQ(std::abs(d(i, j)), 1.0 / std::sqrt(8.0));
      }
      sq += d(i, j) * d(i, j);
    }
    EXPECT_EQ(nnz, 8);
    EXPECT_NEAR(sq, 1.0, 1e-15);
    for (std::int8_t sg : s.column_signs(j)) EXPECT_TRUE(sg == 1 || sg == -1);
  }
  EXPECT_NEAR(frobenius_norm(d) * frobenius_norm(d), 100.0, 1e-12);
}

TEST(SparseSign, ZetaAboveDIsRejected) {
  Rng rng(0);
  try {
    make_sparse_sign(10, 4, 5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parameter);
  }
}

TEST(SparseSign, SameSeedSameEmbedding) {
  Rng r1(77);
  Rng r2(77);
  const SparseSignEmbedding a = make_sparse_sign(500, 60, 8, r1);
  const SparseSignEmbedding b = make_sparse_sign(500, 60, 8, r2);
  EXPECT_EQ(a.to_dense(), b.to_dense());
}

TEST(SparseSign, BasisVectorExtractsColumn) {
  Rng rng(3);
  const SparseSignEmbedding s = make_sparse_sign(20, 10, 4, rng);
  const DenseMatrix d = s.to_dense();
  for (std::size_t j = 0; j < 20; ++j) {
    Vector e(20, 0.0);
    e[j] = 1.0;
    const Vector c = s.apply(e);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(c[i], d(i, j));
  }
}

TEST(SparseSign, ApplyIsLinear) {
  Rng rng(4);
  const SparseSignEmbedding s = make_sparse_sign(50, 30, 8, rng);
  const Vector x = rng.normal_vector(50);
  const Vector y = rng.normal_vector(50);
  const Vector lhs = s.apply(add(x, y));
  const Vector rhs = add(s.apply(x), s.apply(y));
  for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-14);
}

TEST(SparseSign, ApplyMatchesDenseMaterialization) {
  Rng rng(5);
  const SparseSignEmbedding s = make_sparse_sign(50, 20, 8, rng);
  const DenseMatrix x = rng.normal_matrix(50, 5);
  const Eigen::MatrixXd ref = oracle::to_eigen(s.to_dense()) * oracle::to_eigen(x);
  const DenseMatrix got = s.apply(x);
  EXPECT_LE((oracle::to_eigen(got) - ref).norm(), 1e-14 * ref.norm());
}

TEST(SparseSign, ApplyChecksDimensions) {
  Rng rng(6);
  const SparseSignEmbedding s = make_sparse_sign(10, 5, 2, rng);
  EXPECT_THROW(s.apply(Vector(9, 1.0)), Error);
}

TEST(Distortion, PermutationIsExact) {
  const std::size_t m = 30;
  std::vector<std::uint32_t> rows(m);
  std::vector<std::int8_t> signs(m, 1);
  for (std::size_t i = 0; i < m; ++i) rows[i] = static_cast<std::uint32_t>((7 * i + 3) % m);
  const SparseSignEmbedding s(m, m, 1, rows, signs);
  Rng rng(1);
  EXPECT_LE(estimate_distortion(s, haar_orthonormal(m, 4, rng)), 1e-14);
}

TEST(Distortion, TwelveNAcrossSeeds) {
  Rng basis_rng(123);
  const DenseMatrix q = haar_orthonormal(4000, 50, basis_rng);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const SparseSignEmbedding s = make_sparse_sign(4000, 600, 8, rng);
    const double eta = estimate_distortion(s, q);
    EXPECT_LE(eta, 0.5) << "seed " << seed;
    EXPECT_LE(eta, 0.6);
    // Independent SVD of the same product.
    const std::vector<double> sv = oracle::singular_values(s.apply(q));
    EXPECT_NEAR(eta, std::max(1 - sv.back(), sv.front() - 1), 1e-12);
  }
}

TEST(Distortion, NearSqrtNOverD) {
  Rng basis_rng(9);
  const DenseMatrix q = haar_orthonormal(4000, 50, basis_rng);
  std::vector<double> etas;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    etas.push_back(estimate_distortion(make_sparse_sign(4000, 600, 8, rng), q));
  }
  const double target = std::sqrt(50.0 / 600.0);
  EXPECT_NEAR(median(etas), target, 0.5 * target);
}

TEST(Distortion, ShrinkingDIncreasesMedian) {
  Rng basis_rng(10);
  const DenseMatrix q = haar_orthonormal(4000, 50, basis_rng);
  std::vector<double> big;
  std::vector<double> small;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r1(seed);
    Rng r2(seed);
    big.push_back(estimate_distortion(make_sparse_sign(4000, 600, 8, r1), q));
    small.push_back(estimate_distortion(make_sparse_sign(4000, 100, 8, r2), q));
  }
  EXPECT_GT(median(small), median(big));
}

TEST(Distortion, EmbeddingRegimeHoldsWithHighFrequency) {
  // d = const·n·log n/η² with η = 1/2 and a modest constant.
  for (std::size_t n : {10u, 50u}) {
    const std::size_t m = 40 * n;
    const double eta = 0.5;
    const auto d = static_cast<std::size_t>(std::ceil(2.0 * n * std::log(n) / (eta * eta)));
    const auto zeta = static_cast<std::size_t>(std::ceil(2.0 * std::log(n) / eta));
    Rng basis_rng(n);
    const DenseMatrix q = haar_orthonormal(m, n, basis_rng);
    int ok = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
      Rng rng(5000 + t);
      ok += estimate_distortion(make_sparse_sign(m, d, std::min(zeta, d), rng), q) <= eta;
    }
    EXPECT_GE(ok, static_cast<int>(0.95 * trials)) << "n = " << n;
  }
}
