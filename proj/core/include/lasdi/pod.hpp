#pragma once

#include "lasdi/snapshot.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>

namespace lasdi {

/// Truncated left singular basis of a snapshot matrix.
struct PodBasis {
    Eigen::MatrixXd basis;            ///< N_s x n_s, orthonormal columns
    Eigen::VectorXd singular_values;  ///< all numerically nonzero singular values, nonincreasing

    std::size_t latent_dim() const { return static_cast<std::size_t>(basis.cols()); }
    std::size_t full_dim() const { return static_cast<std::size_t>(basis.rows()); }
    std::size_t rank() const { return static_cast<std::size_t>(singular_values.size()); }
};

/// Method of snapshots: eigen-decomposition of the smaller Gram matrix
/// (S S^T or S^T S). Eigenvalues below 1e-12 times the largest are treated as
/// zero. Throws RankError if n_s exceeds the numerical rank or is not smaller
/// than the column count, ConvergenceError if the eigensolver fails.
PodBasis compute_pod(const Eigen::MatrixXd& snapshots, std::size_t n_s);
PodBasis compute_pod(const SnapshotMatrix& snapshots, std::size_t n_s);

/// Phi^T states. Throws ShapeError on a row mismatch.
Eigen::MatrixXd pod_encode(const PodBasis& pod, const Eigen::MatrixXd& states);
/// Phi latent. Throws ShapeError on a row mismatch.
Eigen::MatrixXd pod_decode(const PodBasis& pod, const Eigen::MatrixXd& latent);

/// Fraction of the singular value sum carried by the first n_s values.
/// n_s is clamped to the number of retained values.
double singular_value_mass(const PodBasis& pod, std::size_t n_s);

/// .lpod persistence.
void save(const PodBasis& pod, const std::filesystem::path& path);
PodBasis load_pod(const std::filesystem::path& path);

}  // namespace lasdi
