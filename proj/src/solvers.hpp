#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inner.hpp"
#include "linalg.hpp"
#include "sketch.hpp"

namespace fossils {

struct SolverConfig {
  double d_factor = 12.0;
  std::size_t zeta = 8;
  std::optional<double> eta_override;
  bool safety = false;  // η = 1.2·√(n/d)
  std::size_t q_max = 100;
  double gamma = 10.0;
  double rho = 0.4;
  double be_tol_multiplier = 1.0;
  std::size_t check_every = 5;
  double mu_factor = 10.0;
  double rank_deficiency_threshold = 1.0 / (30.0 * kUnitRoundoff);
  std::uint64_t seed = 0;

  /// Throws ErrorCode::parameter on nonsensical settings.
  void validate() const;
  /// max(n, ⌈d_factor·n⌉)
  std::size_t sketch_dim(std::size_t n) const;
  /// η for an n-column problem sketched to d rows.
  double eta(std::size_t n, std::size_t d) const;
  MomentumCoefficients momentum(std::size_t n, std::size_t d) const;
};

struct SolveResult {
  Vector x;
  std::size_t refinement_steps = 0;
  std::vector<std::size_t> inner_iterations;  // per refinement step (or the single run)
  std::vector<double> update_norms;           // ‖δ‖ per inner iteration, all steps
  std::vector<double> be_history;             // sketched KW at check points
  bool converged = false;
  bool regularized = false;
  double mu = 0.0;
  double condest = 0.0;
  double normest = 0.0;
  double eta = 0.0;
  std::size_t sketch_rows = 0;
  double iteration_floor = 0.0;               // q₀, diagnostic only
  std::vector<Vector> step_solutions;          // x₀, x₁, … in caller coordinates
  std::vector<std::string> warnings;

  std::size_t total_iterations() const;
};

/// Called with a running iteration counter (0 for the initial iterate) and the
/// current iterate in the caller's coordinates.
using IterateObserver = std::function<void(std::size_t iteration, std::span<const double> x)>;

/// x₀ = R⁻¹(Qᵀ(Sb)) for SA = QR.
Vector sketch_and_solve(const DenseMatrix& a, std::span<const double> b,
                        const SparseSignEmbedding& s, const QrFactorization& qr_of_sa);

/// FOSSILS with column scaling, SVD preconditioner, regularization for
/// numerically rank-deficient A and adaptive stopping.
SolveResult fossils_solve(const DenseMatrix& a, std::span<const double> b,
                          const SolverConfig& cfg = {}, const IterateObserver& observe = {});

/// Two refinement steps with the QR preconditioner and a fixed number of
/// Polyak updates per step; no scaling, no adaptive stopping.
SolveResult fossils_basic(const DenseMatrix& a, std::span<const double> b,
                          const SolverConfig& cfg, std::size_t updates_per_step,
                          const IterateObserver& observe = {});

/// x_{i+1} = xᵢ + α·R⁻¹R⁻ᵀAᵀ(b − Axᵢ) + β(xᵢ − x_{i−1}) from x₀ = sketch-and-solve.
SolveResult iterative_sketching_momentum(const DenseMatrix& a, std::span<const double> b,
                                         const SolverConfig& cfg, std::size_t iters,
                                         const IterateObserver& observe = {});

enum class SapInit { zero, sketch_and_solve };

/// LSQR preconditioned by R from QR(SA).
SolveResult sketch_and_precondition(const DenseMatrix& a, std::span<const double> b,
                                    SapInit init, const SolverConfig& cfg, std::size_t iters,
                                    const IterateObserver& observe = {});

enum class SpirInner { lsqr, cg };

/// Sketch-and-solve followed by two refinement steps, each running
/// `iters_per_step` iterations of the chosen Krylov inner solver.
SolveResult spir(const DenseMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                 SpirInner inner, std::size_t iters_per_step,
                 const IterateObserver& observe = {});

/// Householder QR: x = R⁻¹(Qᵀb).
Vector qr_reference_solve(const DenseMatrix& a, std::span<const double> b);

/// q₀ = max(1 + 2·log(1/(κu))/log(1/(1.01η)), 11); κu ≥ 1 gives the minimum.
double iteration_floor(double condest, double eta);

}  // namespace fossils
