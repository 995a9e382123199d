#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace lasdi::linalg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// `lower[i]` couples row i to i-1 (lower[0] unused), `upper[i]` couples row i
/// to i+1 (upper[n-1] unused). The matrix must be diagonally dominant.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

/// Outcome of a dense least-squares solve.
struct LeastSquaresResult {
    MatrixXd solution;                       ///< n x k minimizer (minimum norm if rank deficient)
    Index rank = 0;
    std::vector<Index> deficient_columns;    ///< original column indices dropped by pivoting
    bool used_pivoting = false;

    bool rank_deficient() const { return !deficient_columns.empty(); }
};

/// Minimizes ||A X - B||_F columnwise.
///
/// Householder QR is tried first. When the triangular factor reveals rank
/// deficiency (|R_kk| below `rcond * max|R_ii|`) the solve is redone with
/// column-pivoted QR followed by a complete orthogonal decomposition, which
/// yields the minimum-norm minimizer. A non-positive `rcond` selects
/// max(m, n) * machine epsilon.
LeastSquaresResult least_squares(const MatrixXd& a, const MatrixXd& b, double rcond = -1.0);

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
struct SymmetricEigen {
    VectorXd values;
    MatrixXd vectors;  ///< columns are unit eigenvectors matching `values`
};

/// Throws ConvergenceError if the iteration does not converge.
SymmetricEigen symmetric_eigen(const MatrixXd& symmetric);

/// Restores orthonormality of the columns of `q` in place with two passes of
/// modified Gram-Schmidt. Column spans are preserved.
void reorthonormalize(MatrixXd& q);

}  // namespace lasdi::linalg
