#pragma once

#include "lasdi/fom.hpp"
#include "lasdi/library.hpp"
#include "lasdi/snapshot.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lasdi {

/// Time derivative of each latent row: second-order central differences in
/// the interior, three-point one-sided formulas at both ends.
/// Throws InsufficientDataError when there are fewer than three instants.
Eigen::MatrixXd latent_time_derivative(const Eigen::MatrixXd& block, double dt);

/// Largest absolute entry over all blocks. Returns 1 with a warning for all-zero data.
double rescale_factor(const Eigen::MatrixXd& latent_data);

/// Identified right-hand side dw/dt = Xi^T theta(w) in scaled coordinates
/// w = z / scale.
struct CoefficientMatrix {
    Eigen::MatrixXd xi;  ///< n_l x n_s
    LibrarySpec spec;
    double scale = 1.0;  ///< latent data were divided by this before fitting
};

/// Least-squares fit over one or more latent blocks (each n_s x (N_t+1)),
/// stacking their library and derivative rows. Blocks must already be scaled.
/// Warns when the stacked system has fewer rows than columns and, on rank
/// deficiency, names the dropped library terms.
Eigen::MatrixXd fit_blocks(const std::vector<Eigen::MatrixXd>& blocks, const LibrarySpec& spec, double dt);

CoefficientMatrix fit_single(const Eigen::MatrixXd& block, const LibrarySpec& spec, double dt, double scale = 1.0);

/// One fit over every training block of `latent`, with optional global rescaling.
CoefficientMatrix fit_global(const LatentSnapshotMatrix& latent, const LibrarySpec& spec, double dt,
                             bool rescale = false);

/// Indices of the n_di training points nearest to `query` (Euclidean), ordered
/// by distance with ties going to the lower index.
std::vector<std::size_t> nearest_training(const ParameterPoint& query, const std::vector<ParameterPoint>& training,
                                          std::size_t n_di);

}  // namespace lasdi
