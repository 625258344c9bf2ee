#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "linalg.hpp"
#include "sketch.hpp"

namespace fossils {

inline constexpr double kInfiniteTheta = std::numeric_limits<double>::infinity();

/// Karlson–Waldén estimate of the backward error BE_θ(x̂), evaluated through
/// an SVD of A:
///
///   θ/√(1+θ²‖x̂‖²) · ‖(Σ² + θ²‖r‖²/(1+θ²‖x̂‖²)·I)^{-1/2} Vᵀ Aᵀ r‖,  r = b − Ax̂.
///
/// θ = ∞ is the limit with coefficient 1/‖x̂‖ and shift ‖r‖²/‖x̂‖².
double kw_estimate(const SvdFactorization& a_svd, const DenseMatrix& a,
                   std::span<const double> b, std::span<const double> xhat, double theta);

/// Same formula with the SVD of S·A in place of the SVD of A; O(mn) per call
/// once the factorization exists.
double sketched_kw_estimate(const SvdFactorization& sa_svd, const DenseMatrix& a,
                            std::span<const double> b, std::span<const double> xhat,
                            double theta);

/// ‖Aᵀ(b − Ax̂)‖.
double residual_orthogonality(const DenseMatrix& a, std::span<const double> b,
                              std::span<const double> xhat);

struct DirectionCheck {
  std::size_t index = 0;
  double error_component = 0.0;  // |vᵢᵀ(x̂ − x)| on the normalized problem
  double bound = 0.0;            // c·(σᵢ⁻¹(1+‖x̂‖)ε + σᵢ⁻²‖b − Ax̂‖ε)
  bool skipped = false;          // σᵢ = 0: the bound is undefined
  bool pass = true;
};

struct ComponentwiseReport {
  std::vector<DirectionCheck> directions;
  std::size_t skipped = 0;
  bool pass = true;
};

inline constexpr double kDefaultComponentwiseSlack = 1e4;

/// Checks the error x̂ − x along every right singular vector of A against the
/// backward-stability envelope. Works on the problem rescaled to ‖A‖ = ‖b‖ = 1;
/// `a_svd` must factor the unscaled A and `x` must be a trusted solution.
ComponentwiseReport componentwise_backward_check(const SvdFactorization& a_svd,
                                                 const DenseMatrix& a,
                                                 std::span<const double> b,
                                                 std::span<const double> x,
                                                 std::span<const double> xhat, double eps,
                                                 double slack = kDefaultComponentwiseSlack);

struct ErrorReport {
  double forward_err = 0.0;            // ‖x − x̂‖
  double residual_err = 0.0;           // ‖A(x − x̂)‖
  std::optional<double> kw;            // absent without an SVD of A
  double kw_sketched = 0.0;
  double resid_orth = 0.0;             // ‖Aᵀ(b − Ax̂)‖
  double theta = 1.0;
};

ErrorReport error_metrics(const DenseMatrix& a, std::span<const double> b,
                          std::span<const double> x_true, std::span<const double> xhat,
                          const SvdFactorization& sa_svd, const SvdFactorization* a_svd,
                          double theta);

struct EvaluatorOptions {
  std::uint64_t seed = 0x5eed;
  double d_factor = 20.0;
  std::size_t zeta = 8;
  bool exact_kw = false;  // also factor A itself (O(mn²) once)
};

/// Measures solver output on the problem normalized to ‖A‖ = ‖b‖ = 1, with a
/// measurement sketch independent of any solver's sketch, so that numbers from
/// different solvers on one problem are comparable. θ = 1 throughout.
class Evaluator {
 public:
  Evaluator(const DenseMatrix& a, std::span<const double> b,
            std::optional<std::span<const double>> x_true, const EvaluatorOptions& options = {});

  /// x̂ in the caller's (unnormalized) coordinates.
  ErrorReport measure(std::span<const double> xhat) const;

  double a_scale() const noexcept { return a_scale_; }
  double b_scale() const noexcept { return b_scale_; }
  bool has_reference() const noexcept { return !x_true_.empty(); }

 private:
  DenseMatrix a_;
  Vector b_;
  Vector x_true_;
  double a_scale_ = 1.0;
  double b_scale_ = 1.0;
  SvdFactorization sa_svd_;
  std::optional<SvdFactorization> a_svd_;
};

}  // namespace fossils
