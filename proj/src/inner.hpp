#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "linalg.hpp"

namespace fossils {

/// P ≈ R⁻¹: either the inverse of a triangular R from QR(SA), or V·Σ_reg⁻¹
/// built from SVD(SA) = UΣVᵀ with Σ_reg = (Σ² + μ²I)^{1/2}.
class Preconditioner {
 public:
  enum class Kind { triangular, svd };

  static Preconditioner triangular(DenseMatrix r);
  static Preconditioner from_svd(DenseMatrix v, std::span<const double> sigma, double mu = 0.0);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return kind_ == Kind::triangular ? r_.rows() : v_.rows(); }
  double mu() const noexcept { return mu_; }
  const DenseMatrix& r() const noexcept { return r_; }
  const DenseMatrix& v() const noexcept { return v_; }
  const Vector& sigma_reg() const noexcept { return sigma_reg_; }

  /// P z
  Vector apply(std::span<const double> z) const;
  /// Pᵀ z
  Vector apply_t(std::span<const double> z) const;

 private:
  Preconditioner() = default;

  Kind kind_ = Kind::triangular;
  DenseMatrix r_;
  DenseMatrix v_;
  Vector sigma_reg_;
  double mu_ = 0.0;
};

using LinearOperator = std::function<Vector(std::span<const double>)>;

/// y ↦ Pᵀ(Aᵀ(A(Py))) + μ²·Pᵀ(Py), the preconditioned (regularized) normal
/// equations operator. μ is taken from the preconditioner.
LinearOperator preconditioned_gram(const DenseMatrix& a, const Preconditioner& p);

struct MomentumCoefficients {
  double eta = 0.0;
  double alpha = 1.0;  // (1 − η²)²
  double beta = 0.0;   // η²

  static MomentumCoefficients from_distortion(double eta);
};

struct InnerResult {
  Vector y;
  std::size_t iterations = 0;  // updates performed
  std::vector<double> update_norms;
  bool stopped = false;        // the stopping rule fired before the cap
};

struct PolyakOptions {
  MomentumCoefficients coeffs;
  std::size_t q_max = 100;  // cap on updates
  /// Called after update k (1-based) with δ and the new iterate; returning true
  /// ends the iteration.
  std::function<bool(std::size_t k, std::span<const double> delta, std::span<const double> y)>
      stop;
  /// Test instrumentation: adds fₖ to the iterate after update k.
  std::function<void(std::size_t k, std::span<double> y)> perturb;
  double divergence_factor = 1e6;
};

/// Heavy-ball iteration for gram·y = c from y₀ = y₁ = c:
///   y_{k+1} = y_k + α(c − gram·y_k) + β(y_k − y_{k−1}).
/// After k updates the iterate is y_{k+1}. Throws ErrorCode::divergence when
/// ‖y‖ exceeds divergence_factor·‖c‖ or turns non-finite.
InnerResult polyak_inner(const LinearOperator& gram, std::span<const double> c,
                         const PolyakOptions& options);

struct CgOptions {
  std::size_t max_iterations = 50;
  double tol = 0.0;  // relative to ‖c‖; 0 runs the full budget
  std::function<void(std::size_t k, std::span<const double> y)> observe;
};

/// Conjugate gradient from y = 0. Throws ErrorCode::breakdown on nonpositive
/// curvature.
InnerResult cg_inner(const LinearOperator& gram, std::span<const double> c,
                     const CgOptions& options);

struct LsqrOptions {
  std::size_t max_iterations = 100;
  double atol = 0.0;  // ‖(AP)ᵀr‖ ≤ atol·‖AP‖·‖r‖ stops; 0 runs the full budget
  std::function<void(std::size_t k, std::span<const double> dx)> observe;
};

struct LsqrResult {
  Vector dx;
  std::size_t iterations = 0;
  bool converged = false;
};

/// LSQR on min ‖r − (AP)w‖ with the change of variables folded in: iterates
/// are produced directly as Δx = P·w.
LsqrResult lsqr_preconditioned(const DenseMatrix& a, std::span<const double> r,
                               const Preconditioner& p, const LsqrOptions& options);

/// One refinement step of the generic scheme:
///   c = Pᵀ(Aᵀ(b − Ax₀)),  y = inner(c),  x₁ = x₀ + P·y.
Vector meta_refine(const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
                   const Preconditioner& p,
                   const std::function<Vector(std::span<const double>)>& inner);

struct OuterStep {
  Vector dx;
  InnerResult inner;
};

/// Polyak-based outer solver: Δx = P·y with y ≈ (PᵀAᵀAP + μ²PᵀP)⁻¹Pᵀ(Aᵀr₀).
OuterStep fossils_outer(const DenseMatrix& a, const Preconditioner& p,
                        std::span<const double> r0, const PolyakOptions& options);

}  // namespace fossils
