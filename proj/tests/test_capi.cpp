#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "fossils/fossils.h"

namespace {

struct Owned {
  fls_matrix* a = nullptr;
  fls_config* cfg = nullptr;
  fls_problem* prob = nullptr;
  fls_result* res = nullptr;
  fls_evaluator* ev = nullptr;
  ~Owned() {
    fls_matrix_destroy(a);
    fls_config_destroy(cfg);
    fls_problem_destroy(prob);
    fls_result_destroy(res);
    fls_evaluator_destroy(ev);
  }
};

}  // namespace

TEST(CApi, StatusNamesAndRoundoff) {
  EXPECT_STREQ(fls_status_name(FLS_OK), "ok");
  EXPECT_STREQ(fls_status_name(FLS_ERR_DIVERGENCE), "divergence");
  EXPECT_STREQ(fls_status_name(FLS_ERR_NULL_ARGUMENT), "null-argument");
  EXPECT_EQ(fls_unit_roundoff(), std::ldexp(1.0, -53));
}

TEST(CApi, MatrixLifecycle) {
  Owned o;
  const double data[] = {1, 2, 3, 4, 5, 6};
  ASSERT_EQ(fls_matrix_create(3, 2, data, &o.a), FLS_OK);
  EXPECT_EQ(fls_matrix_rows(o.a), 3u);
  EXPECT_EQ(fls_matrix_cols(o.a), 2u);
  EXPECT_EQ(std::memcmp(fls_matrix_data(o.a), data, sizeof data), 0);
  EXPECT_EQ(fls_matrix_create(3, 2, data, nullptr), FLS_ERR_NULL_ARGUMENT);
  fls_matrix_destroy(nullptr);
}

TEST(CApi, MatrixFileRoundTripAndErrors) {
  Owned o;
  const double data[] = {1.5, -2, 0, 4};
  ASSERT_EQ(fls_matrix_create(2, 2, data, &o.a), FLS_OK);
  const auto path = (std::filesystem::temp_directory_path() / "fls_capi_rt.mtx").string();
  ASSERT_EQ(fls_matrix_write(o.a, path.c_str(), 1), FLS_OK);
  fls_matrix* back = nullptr;
  ASSERT_EQ(fls_matrix_read(path.c_str(), &back), FLS_OK);
  EXPECT_EQ(std::memcmp(fls_matrix_data(back), data, sizeof data), 0);
  fls_matrix_destroy(back);
  std::remove(path.c_str());

  fls_matrix* none = nullptr;
  EXPECT_EQ(fls_matrix_read("/nonexistent/dir/x.mtx", &none), FLS_ERR_IO);
  EXPECT_EQ(none, nullptr);
  EXPECT_NE(std::string(fls_last_error()).find("x.mtx"), std::string::npos);

  const auto bad = (std::filesystem::temp_directory_path() / "fls_capi_bad.mtx").string();
  std::FILE* f = std::fopen(bad.c_str(), "w");
  std::fputs("%%MatrixMarket matrix array complex general\n1 1\n1 0\n", f);
  std::fclose(f);
  EXPECT_EQ(fls_matrix_read(bad.c_str(), &none), FLS_ERR_UNSUPPORTED);
  std::remove(bad.c_str());
}

TEST(CApi, ConfigSettersValidate) {
  Owned o;
  ASSERT_EQ(fls_config_create(&o.cfg), FLS_OK);
  EXPECT_EQ(fls_config_set_d_factor(o.cfg, 20), FLS_OK);
  EXPECT_EQ(fls_config_set_d_factor(o.cfg, 0.5), FLS_ERR_PARAMETER);
  EXPECT_EQ(fls_config_set_zeta(o.cfg, 0), FLS_ERR_PARAMETER);
  EXPECT_EQ(fls_config_set_eta(o.cfg, 1.5), FLS_ERR_PARAMETER);
  EXPECT_EQ(fls_config_set_eta(o.cfg, 0.0), FLS_OK);
  EXPECT_EQ(fls_config_set_seed(o.cfg, 7), FLS_OK);
  EXPECT_EQ(fls_config_set_d_factor(nullptr, 12), FLS_ERR_NULL_ARGUMENT);
}

TEST(CApi, SolverNames) {
  const char* names[] = {"fossils", "fossils-basic", "spir-lsqr", "spir-cg",
                         "isk-momentum", "sap-zero", "sap-sks", "qr"};
  for (int k = 0; k < 8; ++k) {
    fls_solver s;
    ASSERT_EQ(fls_solver_from_name(names[k], &s), FLS_OK);
    EXPECT_EQ(static_cast<int>(s), k);
    EXPECT_STREQ(fls_solver_name(s), names[k]);
  }
  fls_solver s;
  EXPECT_EQ(fls_solver_from_name("lapack", &s), FLS_ERR_PARAMETER);
}

TEST(CApi, FossilsSolveWithEvaluator) {
  Owned o;
  ASSERT_EQ(fls_problem_generate(1000, 20, 1e8, 1e-6, 3, &o.prob), FLS_OK);
  size_t m = 0;
  size_t n = 0;
  const double* b = fls_problem_rhs(o.prob, &m);
  const double* x = fls_problem_solution(o.prob, &n);
  ASSERT_EQ(m, 1000u);
  ASSERT_EQ(n, 20u);
  const fls_matrix* a = fls_problem_matrix(o.prob);

  std::vector<size_t> seen;
  auto cb = [](size_t it, const double*, size_t len, void* user) {
    EXPECT_EQ(len, 20u);
    static_cast<std::vector<size_t>*>(user)->push_back(it);
  };
  ASSERT_EQ(fls_solve(FLS_SOLVER_FOSSILS, a, b, m, nullptr, 0, cb, &seen, &o.res), FLS_OK)
      << fls_last_error();
  EXPECT_TRUE(fls_result_converged(o.res));
  EXPECT_FALSE(fls_result_regularized(o.res));
  EXPECT_EQ(fls_result_refinement_steps(o.res), 2u);
  EXPECT_EQ(seen.size(), fls_result_total_iterations(o.res) + 1);
  EXPECT_EQ(fls_result_step_iterations(o.res, 0) + fls_result_step_iterations(o.res, 1),
            fls_result_total_iterations(o.res));
  size_t len = 0;
  const double* xhat = fls_result_solution(o.res, &len);
  ASSERT_EQ(len, 20u);
  EXPECT_NE(fls_result_step_solution(o.res, 2, &len), nullptr);
  EXPECT_EQ(fls_result_step_solution(o.res, 3, &len), nullptr);
  EXPECT_GT(fls_result_condest(o.res), 1e7);

  ASSERT_EQ(fls_evaluator_create(a, b, m, x, n, 11, 1, &o.ev), FLS_OK);
  fls_metrics mt;
  ASSERT_EQ(fls_evaluator_measure(o.ev, xhat, 20, &mt), FLS_OK);
  EXPECT_LE(mt.kw_sketched, 20 * std::ldexp(1.0, -53));
  EXPECT_LE(mt.kw, 20 * std::ldexp(1.0, -53));
  EXPECT_LE(mt.forward_err, 1e8 * 1e-12);
  EXPECT_EQ(fls_evaluator_measure(o.ev, xhat, 19, &mt), FLS_ERR_DIMENSION);
}

TEST(CApi, AllSolversOnOneProblem) {
  Owned o;
  ASSERT_EQ(fls_problem_difficulty(500, 10, 1e6, 1, &o.prob), FLS_OK);
  size_t m = 0;
  const double* b = fls_problem_rhs(o.prob, &m);
  for (int k = 0; k < 8; ++k) {
    fls_result* r = nullptr;
    ASSERT_EQ(fls_solve(static_cast<fls_solver>(k), fls_problem_matrix(o.prob), b, m, nullptr, 50,
                        nullptr, nullptr, &r),
              FLS_OK)
        << k << ": " << fls_last_error();
    size_t n = 0;
    const double* x = fls_result_solution(r, &n);
    ASSERT_EQ(n, 10u);
    for (size_t i = 0; i < n; ++i) EXPECT_TRUE(std::isfinite(x[i]));
    fls_result_destroy(r);
  }
}

TEST(CApi, AllOnesWarning) {
  Owned o;
  std::vector<double> ones(100 * 5, 1.0);
  std::vector<double> b(100, 1.0);
  ASSERT_EQ(fls_matrix_create(100, 5, ones.data(), &o.a), FLS_OK);
  ASSERT_EQ(fls_solve(FLS_SOLVER_FOSSILS, o.a, b.data(), 100, nullptr, 0, nullptr, nullptr, &o.res),
            FLS_OK);
  EXPECT_TRUE(fls_result_regularized(o.res));
  EXPECT_GT(fls_result_mu(o.res), 0.0);
  ASSERT_EQ(fls_result_warning_count(o.res), 1u);
  EXPECT_EQ(std::string(fls_result_warning(o.res, 0)).rfind("Warning! Condition number estimate is", 0),
            0u);
  EXPECT_EQ(fls_result_warning(o.res, 1), nullptr);
}

TEST(CApi, ErrorStatuses) {
  Owned o;
  const double zero[6] = {0, 0, 0, 0, 0, 0};
  ASSERT_EQ(fls_matrix_create(3, 2, zero, &o.a), FLS_OK);
  const double b[3] = {1, 2, 3};
  fls_result* r = nullptr;
  EXPECT_EQ(fls_solve(FLS_SOLVER_FOSSILS, o.a, b, 3, nullptr, 0, nullptr, nullptr, &r),
            FLS_ERR_PARAMETER);
  EXPECT_EQ(r, nullptr);
  EXPECT_EQ(fls_solve(FLS_SOLVER_FOSSILS, o.a, b, 2, nullptr, 0, nullptr, nullptr, &r),
            FLS_ERR_DIMENSION);
  EXPECT_EQ(fls_solve(FLS_SOLVER_FOSSILS, nullptr, b, 3, nullptr, 0, nullptr, nullptr, &r),
            FLS_ERR_NULL_ARGUMENT);
  EXPECT_EQ(fls_solve(FLS_SOLVER_QR, o.a, b, 3, nullptr, 0, nullptr, nullptr, &r), FLS_ERR_SINGULAR);
  EXPECT_EQ(fls_solve(static_cast<fls_solver>(42), o.a, b, 3, nullptr, 0, nullptr, nullptr, &r),
            FLS_ERR_PARAMETER);
  EXPECT_STRNE(fls_last_error(), "");
}

TEST(CApi, DeterministicAcrossCalls) {
  Owned o;
  ASSERT_EQ(fls_problem_generate(800, 15, 1e10, 1e-4, 9, &o.prob), FLS_OK);
  ASSERT_EQ(fls_config_create(&o.cfg), FLS_OK);
  ASSERT_EQ(fls_config_set_seed(o.cfg, 1234), FLS_OK);
  size_t m = 0;
  const double* b = fls_problem_rhs(o.prob, &m);
  fls_result* r1 = nullptr;
  fls_result* r2 = nullptr;
  ASSERT_EQ(fls_solve(FLS_SOLVER_FOSSILS, fls_problem_matrix(o.prob), b, m, o.cfg, 0, nullptr,
                      nullptr, &r1),
            FLS_OK);
  ASSERT_EQ(fls_solve(FLS_SOLVER_FOSSILS, fls_problem_matrix(o.prob), b, m, o.cfg, 0, nullptr,
                      nullptr, &r2),
            FLS_OK);
  size_t n1 = 0;
  size_t n2 = 0;
  const double* x1 = fls_result_solution(r1, &n1);
  const double* x2 = fls_result_solution(r2, &n2);
  ASSERT_EQ(n1, n2);
  EXPECT_EQ(std::memcmp(x1, x2, n1 * sizeof(double)), 0);
  fls_result_destroy(r1);
  fls_result_destroy(r2);
}
