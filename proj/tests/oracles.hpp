#pragma once

// Independent reference computations for the tests, built on Eigen rather
// than on the library's own kernels.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "linalg.hpp"
#include "sketch.hpp"

namespace oracle {

Eigen::MatrixXd to_eigen(const fossils::DenseMatrix& a);
Eigen::VectorXd to_eigen(std::span<const double> v);
fossils::Vector from_eigen(const Eigen::VectorXd& v);

/// Least-squares solution by column-pivoted Householder QR.
fossils::Vector ls_solve(const fossils::DenseMatrix& a, std::span<const double> b);

/// All singular values, descending.
std::vector<double> singular_values(const fossils::DenseMatrix& a);

/// ‖(AᵀA + αI)^{-1/2}Aᵀr‖·θ/√(1+θ²‖x̂‖²), with α = θ²‖r‖²/(1+θ²‖x̂‖²), using a
/// symmetric eigensolver for the inverse square root.
double kw_matrix_form(const fossils::DenseMatrix& a, std::span<const double> b,
                      std::span<const double> xhat, double theta);

/// Backward error by direct minimization. For a fixed perturbed residual r̃
/// the smallest ‖[ΔA, θΔb]‖_F making x̂ optimal solves a linear
/// minimum-norm problem; the outer minimization over r̃ uses multistart
/// Nelder–Mead. Intended for m ≤ 6.
double exact_backward_error(const fossils::DenseMatrix& a, std::span<const double> b,
                            std::span<const double> xhat, double theta, std::uint64_t seed);

/// Measured distortion of S on range(A): max(1 − σ_min(SQ), σ_max(SQ) − 1)
/// with Q an orthonormal basis of range(A).
double distortion_on_range(const fossils::SparseSignEmbedding& s, const fossils::DenseMatrix& a);

}  // namespace oracle
