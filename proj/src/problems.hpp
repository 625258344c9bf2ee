#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include "linalg.hpp"

namespace fossils {

struct LeastSquaresProblem {
  DenseMatrix a;
  Vector b;
  std::optional<Vector> x_true;  // the exact LS solution, for synthetic problems
  double kappa_target = 1.0;
  double resid_target = 0.0;
  std::uint64_t seed = 0;
};

/// A = U·diag(σ)·Vᵀ with Haar U (m×n), V (n×n) and σ log-spaced from 1 down to
/// 1/κ; x uniform on the unit sphere; b = Ax + r with r uniform on the sphere
/// of radius `resid_norm` in range(A)^⊥.
LeastSquaresProblem generate_random_problem(std::size_t m, std::size_t n, double kappa,
                                            double resid_norm, std::uint64_t seed);

/// κ = difficulty and ‖b − Ax‖ = difficulty·u.
LeastSquaresProblem difficulty_problem(std::size_t m, std::size_t n, double difficulty,
                                       std::uint64_t seed);

/// `count` values log-spaced over [lo, hi] inclusive.
std::vector<double> logspace(double lo, double hi, std::size_t count);

struct ColumnScaling {
  DenseMatrix a_scaled;  // unit-norm columns
  Vector norms;          // a = a_scaled·diag(norms)
};

/// With `allow_zero`, zero columns are kept as-is with unit scale instead of
/// raising an error.
ColumnScaling column_scale(const DenseMatrix& a, bool allow_zero = false);
/// x = diag(norms)⁻¹·x_scaled.
Vector unscale_solution(std::span<const double> x_scaled, std::span<const double> norms);

/// MatrixMarket reader: "%%MatrixMarket matrix {array|coordinate} {real|integer}
/// general". Coordinate duplicates are summed.
DenseMatrix read_matrix_market(const std::filesystem::path& path);
DenseMatrix parse_matrix_market(std::string_view text);

enum class MatrixMarketFormat { array, coordinate };
void write_matrix_market(const DenseMatrix& a, const std::filesystem::path& path,
                         MatrixMarketFormat format = MatrixMarketFormat::array);
std::string format_matrix_market(const DenseMatrix& a,
                                 MatrixMarketFormat format = MatrixMarketFormat::array);

}  // namespace fossils
