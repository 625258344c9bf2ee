#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "error.hpp"
#include "oracles.hpp"
#include "problems.hpp"

using namespace fossils;

namespace {

constexpr double u = kUnitRoundoff;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io;
}

}  // namespace

TEST(Generator, ConditionNumberMatchesTarget) {
  for (double kappa : {1.0, 1e2, 1e6, 1e10}) {
    const LeastSquaresProblem p = generate_random_problem(300, 12, kappa, 1e-3, 1);
    const std::vector<double> s = oracle::singular_values(p.a);
    const double cond = s.front() / s.back();
    EXPECT_GE(cond, kappa / 1.01);
    EXPECT_LE(cond, 1.01 * kappa);
  }
}

TEST(Generator, ResidualHasRequestedNormAndIsOrthogonal) {
  const LeastSquaresProblem p = generate_random_problem(200, 10, 1e4, 0.37, 2);
  const Vector r = residual(p.a, p.b, *p.x_true);
  EXPECT_NEAR(norm2(r), 0.37, 1e-13 * 0.37);
  EXPECT_LE(norm2(matvec_t(p.a, r)), 100 * 200 * 10 * u);
}

TEST(Generator, WellConditionedConsistentRecovered) {
  const LeastSquaresProblem p = generate_random_problem(40, 6, 1.0, 0.0, 3);
  const Vector x = oracle::ls_solve(p.a, p.b);
  EXPECT_LE(norm2(subtract(x, *p.x_true)), 10 * 6 * u);
  EXPECT_NEAR(norm2(*p.x_true), 1.0, 1e-15);
}

TEST(Generator, SameSeedSameProblem) {
  const LeastSquaresProblem p = generate_random_problem(50, 4, 1e3, 1e-2, 99);
  const LeastSquaresProblem q = generate_random_problem(50, 4, 1e3, 1e-2, 99);
  EXPECT_EQ(p.a, q.a);
  EXPECT_EQ(p.b, q.b);
  EXPECT_NE(generate_random_problem(50, 4, 1e3, 1e-2, 100).b, p.b);
}

TEST(Generator, RejectsResidualWhenSquare) {
  EXPECT_EQ(code_of([] { generate_random_problem(5, 5, 10.0, 1e-3, 0); }), ErrorCode::parameter);
  EXPECT_EQ(code_of([] { generate_random_problem(5, 6, 10.0, 0.0, 0); }), ErrorCode::dimension);
  EXPECT_EQ(code_of([] { generate_random_problem(9, 3, 0.5, 0.0, 0); }), ErrorCode::parameter);
}

TEST(Generator, PropertyOrthogonalityAndScaleOverManyConfigs) {
  Rng cfg(2024);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + cfg.below(15);
    const std::size_t m = n + 1 + cfg.below(60);
    const double kappa = std::pow(10.0, static_cast<double>(cfg.below(17)));
    const double resid = std::pow(10.0, -static_cast<double>(cfg.below(16)));
    const LeastSquaresProblem p = generate_random_problem(m, n, kappa, resid, 7000 + t);
    const Vector r = residual(p.a, p.b, *p.x_true);
    EXPECT_LE(norm2(matvec_t(p.a, r)), 100.0 * m * n * u) << "config " << t;
    EXPECT_NEAR(oracle::singular_values(p.a).front(), 1.0, 1e-12) << "config " << t;
    // Forming b = Ax + r rounds at the level u·‖b‖, which swamps tiny residuals.
    const double floor = 10.0 * n * u * norm2(p.b);
    EXPECT_NEAR(norm2(r), resid, std::max(1e-12 * resid, floor)) << "config " << t;
  }
}

TEST(Generator, SpectrumIsLogSpaced) {
  const std::size_t n = 20;
  for (double kappa : {1e4, 1e10}) {
    const LeastSquaresProblem p = generate_random_problem(400, n, kappa, 1e-4, 5);
    const std::vector<double> s = oracle::singular_values(p.a);
    for (std::size_t i = 0; i < n; ++i) {
      const double target = std::pow(kappa, -static_cast<double>(i) / (n - 1));
      EXPECT_NEAR(s[i], target, 0.01 * target) << "kappa " << kappa << " i " << i;
    }
  }
}

TEST(Generator, ExtremeSpectrumAtLargeKappa) {
  for (double kappa : {1e12, 1e14}) {
    const LeastSquaresProblem p = generate_random_problem(400, 20, kappa, 1e-4, 6);
    const std::vector<double> s = oracle::singular_values(p.a);
    EXPECT_NEAR(s.front(), 1.0, 0.1);
    EXPECT_NEAR(s.back(), 1.0 / kappa, 0.1 / kappa) << "kappa " << kappa;
  }
}

TEST(Generator, SmallestSingularValueHitsRoundingFloorAtSixteenOrders) {
  // Storing A perturbs it by about u·‖A‖ = 1.1e-16, the size of σ_n itself.
  const LeastSquaresProblem p = generate_random_problem(400, 20, 1e16, 1e-4, 6);
  const std::vector<double> s = oracle::singular_values(p.a);
  EXPECT_NEAR(s.front(), 1.0, 0.1);
  EXPECT_LE(std::abs(s.back() - 1e-16), 10 * u);
}

TEST(Difficulty, UnitDifficulty) {
  const LeastSquaresProblem p = difficulty_problem(30, 3, 1.0, 1);
  EXPECT_EQ(p.kappa_target, 1.0);
  EXPECT_EQ(p.resid_target, u);
}

TEST(Difficulty, TwelveOrders) {
  const LeastSquaresProblem p = difficulty_problem(30, 3, 1e12, 1);
  EXPECT_EQ(p.kappa_target, 1e12);
  EXPECT_EQ(p.resid_target, 1e12 * 0x1p-53);
  EXPECT_NEAR(p.resid_target, 1.11e-4, 0.01e-4);
}

TEST(Difficulty, OutOfRangeRejected) {
  EXPECT_EQ(code_of([] { difficulty_problem(30, 3, 0.5, 1); }), ErrorCode::parameter);
  EXPECT_EQ(code_of([] { difficulty_problem(30, 3, 1e17, 1); }), ErrorCode::parameter);
}

TEST(Logspace, SeventeenPointGrid) {
  const std::vector<double> g = logspace(1.0, 1e16, 17);
  ASSERT_EQ(g.size(), 17u);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_NEAR(g[i], std::pow(10.0, i), 1e-12 * std::pow(10.0, i));
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 1e16);
}

TEST(ColumnScale, UnitColumnsUnchanged) {
  const DenseMatrix a = DenseMatrix::from_rows({{1, 0}, {0, 0.6}, {0, 0.8}});
  const ColumnScaling cs = column_scale(a);
  EXPECT_EQ(cs.norms, (Vector{1, 1}));
  EXPECT_EQ(cs.a_scaled, a);
}

TEST(ColumnScale, HandExample) {
  const ColumnScaling cs = column_scale(DenseMatrix::from_rows({{3, 0}, {4, 0}, {0, 2}}));
  EXPECT_DOUBLE_EQ(cs.norms[0], 5.0);
  EXPECT_DOUBLE_EQ(cs.norms[1], 2.0);
}

TEST(ColumnScale, ZeroColumnNamed) {
  try {
    column_scale(DenseMatrix::from_rows({{1, 0, 2}, {1, 0, 3}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parameter);
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos);
  }
  const ColumnScaling cs = column_scale(DenseMatrix::from_rows({{1, 0}, {1, 0}}), true);
  EXPECT_EQ(cs.norms[1], 1.0);
}

TEST(ColumnScale, ScaledSolveMatchesDirect) {
  LeastSquaresProblem p = generate_random_problem(50, 5, 1e3, 1e-2, 21);
  for (std::size_t j = 0; j < 5; ++j) scale(std::pow(10.0, static_cast<double>(j) - 2), p.a.col(j));
  const ColumnScaling cs = column_scale(p.a);
  const Vector x = unscale_solution(oracle::ls_solve(cs.a_scaled, p.b), cs.norms);
  const Vector ref = oracle::ls_solve(p.a, p.b);
  EXPECT_LE(norm2(subtract(x, ref)), 1e-12 * norm2(ref));
}

TEST(ColumnScale, RoundTripReconstructsA) {
  Rng rng(3);
  DenseMatrix a = rng.normal_matrix(20, 6);
  for (std::size_t j = 0; j < 6; ++j) scale(std::pow(7.0, static_cast<double>(j)), a.col(j));
  const ColumnScaling cs = column_scale(a);
  DenseMatrix back = cs.a_scaled;
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_NEAR(norm2(cs.a_scaled.col(j)), 1.0, 1e-15);
    scale(cs.norms[j], back.col(j));
  }
  EXPECT_LE(frobenius_norm(subtract(back, a)), 1e-15 * frobenius_norm(a));
}

TEST(MatrixMarket, ArrayIsColumnMajor) {
  const DenseMatrix a = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  EXPECT_EQ(a, DenseMatrix::from_rows({{1, 3}, {2, 4}}));
}

TEST(MatrixMarket, CoordinateDiagonal) {
  const DenseMatrix a = parse_matrix_market(
      "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 5.0\n2 2 7.0\n");
  EXPECT_EQ(a, DenseMatrix::from_rows({{5, 0}, {0, 7}}));
}

TEST(MatrixMarket, CoordinateDuplicatesSummed) {
  const DenseMatrix a = parse_matrix_market(
      "%%MatrixMarket matrix coordinate integer general\n2 1 3\n1 1 1\n1 1 2\n2 1 4\n");
  EXPECT_EQ(a, DenseMatrix::from_rows({{3}, {4}}));
}

TEST(MatrixMarket, RejectsUnsupportedHeaders) {
  EXPECT_EQ(code_of([] { parse_matrix_market("%%MatrixMarket matrix array complex general\n1 1\n1 0\n"); }),
            ErrorCode::unsupported);
  EXPECT_EQ(code_of([] { parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n"); }),
            ErrorCode::unsupported);
  EXPECT_EQ(code_of([] { parse_matrix_market("%%MatrixMarket matrix array real symmetric\n1 1\n1\n"); }),
            ErrorCode::unsupported);
}

TEST(MatrixMarket, ParseErrorNamesLine) {
  try {
    parse_matrix_market("%%MatrixMarket matrix array real general\n2 1\n1\nabc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse_matrix_market("not a header\n"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { parse_matrix_market("%%MatrixMarket matrix array real general\n2 1\n1\n"); }),
            ErrorCode::parse);
  EXPECT_EQ(code_of([] {
              parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
            }),
            ErrorCode::parse);
}

TEST(MatrixMarket, RoundTripBothFormats) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    DenseMatrix a = rng.normal_matrix(1 + rng.below(8), 1 + rng.below(5));
    for (double& v : a.data())
      if (rng.coin()) v = 0.0;
    for (MatrixMarketFormat f : {MatrixMarketFormat::array, MatrixMarketFormat::coordinate}) {
      EXPECT_EQ(parse_matrix_market(format_matrix_market(a, f)), a);
    }
  }
}

TEST(MatrixMarket, FileRoundTripAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "fossils_problems_test";
  std::filesystem::create_directories(dir);
  Rng rng(1);
  const DenseMatrix a = rng.normal_matrix(6, 3);
  write_matrix_market(a, dir / "a.mtx", MatrixMarketFormat::coordinate);
  EXPECT_EQ(read_matrix_market(dir / "a.mtx"), a);
  EXPECT_EQ(code_of([&] { read_matrix_market(dir / "missing.mtx"); }), ErrorCode::io);
  std::filesystem::remove_all(dir);
}
