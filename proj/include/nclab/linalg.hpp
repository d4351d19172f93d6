#pragma once

#include "nclab/core.hpp"

namespace nclab {

/// Orthonormal basis (d x r) of ker A. Singular values at or below tol * sigma_max
/// count as zero; tol <= 0 selects max(m, d) * machine epsilon.
Matrix null_space_basis(const Matrix& A, double tol = 0.0);

/// Number of singular values above tol * sigma_max (same default as above).
Index numerical_rank(const Matrix& A, double tol = 0.0);

/// Moore-Penrose inverse through the SVD with the same rank rule.
Matrix pseudo_inverse(const Matrix& A, double tol = 0.0);

/// Smallest eigenvalue of the symmetric part of A.
double min_eigenvalue(const Matrix& A);

/// Standard normal CDF and upper tail, both computed with erfc for accuracy in the tails.
double normal_cdf(double x);
double normal_sf(double x);

}  // namespace nclab
