#include "lasdi/regression.hpp"

#include "lasdi/diagnostics.hpp"
#include "lasdi/error.hpp"
#include "lasdi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lasdi {

Eigen::MatrixXd latent_time_derivative(const Eigen::MatrixXd& block, double dt) {
    const Eigen::Index n = block.cols();
    if (n < 3) {
        throw InsufficientDataError("latent_time_derivative needs at least 3 time instants, got " + std::to_string(n));
    }
    if (!(dt > 0.0)) throw Error("latent_time_derivative: dt must be positive");
    Eigen::MatrixXd d(block.rows(), n);
    const double inv2 = 1.0 / (2.0 * dt);
    d.col(0) = (-3.0 * block.col(0) + 4.0 * block.col(1) - block.col(2)) * inv2;
    for (Eigen::Index j = 1; j + 1 < n; ++j) d.col(j) = (block.col(j + 1) - block.col(j - 1)) * inv2;
    d.col(n - 1) = (3.0 * block.col(n - 1) - 4.0 * block.col(n - 2) + block.col(n - 3)) * inv2;
    return d;
}

double rescale_factor(const Eigen::MatrixXd& latent_data) {
    const double s = latent_data.size() == 0 ? 0.0 : latent_data.cwiseAbs().maxCoeff();
    if (!(s > 0.0)) {
        diag::warn("rescale: latent data are identically zero, using scale 1");
        return 1.0;
    }
    return s;
}

Eigen::MatrixXd fit_blocks(const std::vector<Eigen::MatrixXd>& blocks, const LibrarySpec& spec, double dt) {
    if (blocks.empty()) throw InsufficientDataError("fit: no latent blocks given");
    const Library lib(spec);
    Eigen::Index rows = 0;
    for (const auto& b : blocks) {
        if (static_cast<std::size_t>(b.rows()) != spec.latent_dim) {
            throw ShapeError("fit: latent block has " + std::to_string(b.rows()) + " rows, library expects " +
                             std::to_string(spec.latent_dim));
        }
        rows += b.cols();
    }
    const auto n_l = static_cast<Eigen::Index>(lib.size());
    Eigen::MatrixXd theta(rows, n_l);
    Eigen::MatrixXd rhs(rows, static_cast<Eigen::Index>(spec.latent_dim));
    Eigen::Index r = 0;
    for (const auto& b : blocks) {
        theta.middleRows(r, b.cols()) = lib.evaluate(b.transpose());
        rhs.middleRows(r, b.cols()) = latent_time_derivative(b, dt).transpose();
        r += b.cols();
    }
    if (rows < n_l) {
        diag::warn("fit: " + std::to_string(rows) + " samples for " + std::to_string(n_l) +
                   " library terms; the system is underdetermined");
    }
    auto ls = linalg::least_squares(theta, rhs);
    if (ls.rank_deficient()) {
        const auto names = lib.term_names();
        std::string cols;
        for (auto c : ls.deficient_columns) {
            if (!cols.empty()) cols += ", ";
            cols += names[static_cast<std::size_t>(c)];
        }
        diag::warn("fit: library matrix is rank deficient (rank " + std::to_string(ls.rank) + " of " +
                   std::to_string(n_l) + "), minimum-norm solution used; dependent terms: " + cols);
    }
    if (!ls.solution.allFinite()) throw Error("fit: non-finite coefficients");
    return ls.solution;
}

CoefficientMatrix fit_single(const Eigen::MatrixXd& block, const LibrarySpec& spec, double dt, double scale) {
    return CoefficientMatrix{fit_blocks({block}, spec, dt), spec, scale};
}

CoefficientMatrix fit_global(const LatentSnapshotMatrix& latent, const LibrarySpec& spec, double dt, bool rescale) {
    const double s = rescale ? rescale_factor(latent.data()) : 1.0;
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(latent.n_param());
    for (std::size_t k = 0; k < latent.n_param(); ++k) blocks.emplace_back(latent.block(k) / s);
    return CoefficientMatrix{fit_blocks(blocks, spec, dt), spec, s};
}

std::vector<std::size_t> nearest_training(const ParameterPoint& query, const std::vector<ParameterPoint>& training,
                                          std::size_t n_di) {
    if (n_di == 0 || n_di > training.size()) {
        throw Error("nearest_training: n_DI = " + std::to_string(n_di) + " must lie in 1.." +
                    std::to_string(training.size()));
    }
    std::vector<double> dist(training.size());
    for (std::size_t k = 0; k < training.size(); ++k) {
        if (training[k].size() != query.size()) {
            throw ShapeError("nearest_training: query has dimension " + std::to_string(query.size()) +
                             ", training point " + std::to_string(k) + " has " + std::to_string(training[k].size()));
        }
        dist[k] = distance(query, training[k]);
    }
    std::vector<std::size_t> idx(training.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    idx.resize(n_di);
    return idx;
}

}  // namespace lasdi
