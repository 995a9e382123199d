#include "lasdi/linalg.hpp"

#include "lasdi/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lasdi::linalg {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw ShapeError("solve_tridiagonal: band and rhs lengths differ");
    }
    if (n == 0) return;
    std::vector<double> c(n);
    double denom = diag[0];
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c[i - 1];
        c[i] = (i + 1 < n) ? upper[i] / denom : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

namespace {

// Householder vector v and beta = 2 / v^T v
// such that (I - beta v v^T) x = alpha e_1.
struct Reflector {
    VectorXd v;
    double beta = 0.0;
    double alpha = 0.0;
};

Reflector make_reflector(const Eigen::Ref<const VectorXd>& x) {
    Reflector h;
    h.v = x;
    const double norm = x.norm();
    if (norm == 0.0) {
        h.beta = 0.0;
        h.alpha = 0.0;
        return h;
    }
    h.alpha = x(0) >= 0.0 ? -norm : norm;
    h.v(0) -= h.alpha;
    const double vtv = h.v.squaredNorm();
    h.beta = vtv > 0.0 ? 2.0 / vtv : 0.0;
    return h;
}

void apply_left(const Reflector& h, Eigen::Ref<MatrixXd> block) {
    if (h.beta == 0.0 || block.cols() == 0) return;
    Eigen::RowVectorXd w = h.v.transpose() * block;
    block.noalias() -= (h.beta * h.v) * w;
}

struct QrFactors {
    MatrixXd r;                   // m x n, upper triangle holds R
    MatrixXd qtb;                 // Q^T B
    std::vector<Index> perm;      // column j of R corresponds to original column perm[j]
};

QrFactors householder_qr(const MatrixXd& a, const MatrixXd& b, bool pivot) {
    const Index m = a.rows();
    const Index n = a.cols();
    QrFactors f{a, b, std::vector<Index>(static_cast<std::size_t>(n))};
    std::iota(f.perm.begin(), f.perm.end(), Index{0});
    const Index steps = std::min(m, n);
    for (Index k = 0; k < steps; ++k) {
        if (pivot) {
            Index best = k;
            double best_norm = -1.0;
            for (Index j = k; j < n; ++j) {
                const double nj = f.r.col(j).tail(m - k).squaredNorm();
                if (nj > best_norm) {
                    best_norm = nj;
                    best = j;
                }
            }
            if (best != k) {
                f.r.col(k).swap(f.r.col(best));
                std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(best)]);
            }
        }
        Reflector h = make_reflector(f.r.col(k).tail(m - k));
        apply_left(h, f.r.block(k, k + 1, m - k, n - k - 1));
        apply_left(h, f.qtb.bottomRows(m - k));
        f.r(k, k) = h.beta == 0.0 ? f.r(k, k) : h.alpha;
        f.r.col(k).tail(m - k - 1).setZero();
    }
    return f;
}

Index detect_rank(const MatrixXd& r, double rcond) {
    const Index steps = std::min(r.rows(), r.cols());
    double max_diag = 0.0;
    for (Index k = 0; k < steps; ++k) max_diag = std::max(max_diag, std::abs(r(k, k)));
    if (max_diag == 0.0) return 0;
    Index rank = 0;
    for (Index k = 0; k < steps; ++k) {
        if (std::abs(r(k, k)) > rcond * max_diag) ++rank;
        else break;
    }
    return rank;
}

}  // namespace

LeastSquaresResult least_squares(const MatrixXd& a, const MatrixXd& b, double rcond) {
    if (a.rows() != b.rows()) {
        throw ShapeError("least_squares: A has " + std::to_string(a.rows()) + " rows but B has " +
                         std::to_string(b.rows()));
    }
    const Index m = a.rows();
    const Index n = a.cols();
    if (rcond <= 0.0) {
        rcond = static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon();
    }

    LeastSquaresResult result;
    if (n == 0) {
        result.solution = MatrixXd::Zero(0, b.cols());
        return result;
    }

    if (m >= n) {
        QrFactors f = householder_qr(a, b, false);
        if (detect_rank(f.r, rcond) == n) {
            result.rank = n;
            result.solution = f.r.topLeftCorner(n, n)
                                  .triangularView<Eigen::Upper>()
                                  .solve(f.qtb.topRows(n));
            return result;
        }
    }

    // Column-pivoted QR, then a complete orthogonal decomposition for the
    // minimum-norm solution.
    QrFactors f = householder_qr(a, b, true);
    const Index rank = detect_rank(f.r, rcond);
    result.used_pivoting = true;
    result.rank = rank;
    for (Index j = rank; j < n; ++j) result.deficient_columns.push_back(f.perm[static_cast<std::size_t>(j)]);
    std::sort(result.deficient_columns.begin(), result.deficient_columns.end());

    MatrixXd y = MatrixXd::Zero(n, b.cols());
    if (rank > 0) {
        // R1 = [R11 R12] is rank x n. Factor R1^T = Z [T; 0].
        MatrixXd r1t_lower = f.r.topRows(rank).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
        std::vector<Reflector> reflectors;
        reflectors.reserve(static_cast<std::size_t>(rank));
        MatrixXd work = r1t_lower;
        for (Index k = 0; k < rank; ++k) {
            Reflector h = make_reflector(work.col(k).tail(n - k));
            apply_left(h, work.block(k, k + 1, n - k, rank - k - 1));
            work(k, k) = h.beta == 0.0 ? work(k, k) : h.alpha;
            work.col(k).tail(n - k - 1).setZero();
            reflectors.push_back(std::move(h));
        }
        // R1 y = c1 with R1 = T^T Z1^T: solve T^T w = c1, then y = Z [w; 0].
        MatrixXd w = work.topLeftCorner(rank, rank)
                         .triangularView<Eigen::Upper>()
                         .transpose()
                         .solve(f.qtb.topRows(rank));
        y.topRows(rank) = w;
        for (Index k = rank; k-- > 0;) {
            apply_left(reflectors[static_cast<std::size_t>(k)], y.bottomRows(n - k));
        }
    }
    result.solution = MatrixXd::Zero(n, b.cols());
    for (Index j = 0; j < n; ++j) result.solution.row(f.perm[static_cast<std::size_t>(j)]) = y.row(j);
    return result;
}

SymmetricEigen symmetric_eigen(const MatrixXd& symmetric) {
    if (symmetric.rows() != symmetric.cols()) {
        throw ShapeError("symmetric_eigen: matrix is not square");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetric, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("symmetric_eigen: eigen-iteration did not converge");
    }
    // Eigen returns ascending order.
    SymmetricEigen out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

void reorthonormalize(MatrixXd& q) {
    for (int pass = 0; pass < 2; ++pass) {
        for (Index j = 0; j < q.cols(); ++j) {
            for (Index i = 0; i < j; ++i) {
                q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
            }
            const double norm = q.col(j).norm();
            if (norm > 0.0) q.col(j) /= norm;
        }
    }
}

}  // namespace lasdi::linalg
