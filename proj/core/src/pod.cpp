#include "lasdi/pod.hpp"

#include "binary_io.hpp"
#include "lasdi/error.hpp"
#include "lasdi/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace lasdi {

namespace {

constexpr io::Magic kPodMagic{'L', 'A', 'S', 'D', 'I', 'P', 'O', 'D'};
constexpr std::uint32_t kPodVersion = 1;
constexpr double kRankCutoff = 1e-12;

}  // namespace

PodBasis compute_pod(const Eigen::MatrixXd& s, std::size_t n_s) {
    const auto rows = static_cast<std::size_t>(s.rows());
    const auto cols = static_cast<std::size_t>(s.cols());
    if (n_s == 0) throw RankError("compute_pod: latent dimension must be at least 1");
    if (n_s >= cols) {
        throw RankError("compute_pod: latent dimension " + std::to_string(n_s) +
                        " must be smaller than the snapshot count " + std::to_string(cols));
    }
    if (!s.allFinite()) throw NonFiniteError("compute_pod: snapshots contain non-finite values", 0, 0);

    const bool row_side = rows <= cols;
    const Eigen::MatrixXd gram = row_side ? Eigen::MatrixXd(s * s.transpose()) : Eigen::MatrixXd(s.transpose() * s);
    const auto eig = linalg::symmetric_eigen(gram);

    const double top = eig.values.size() > 0 ? eig.values(0) : 0.0;
    Eigen::Index rank = 0;
    if (top > 0.0) {
        while (rank < eig.values.size() && eig.values(rank) > kRankCutoff * top) ++rank;
    }
    if (n_s > static_cast<std::size_t>(rank)) {
        throw RankError("compute_pod: latent dimension " + std::to_string(n_s) + " exceeds numerical rank " +
                        std::to_string(rank));
    }

    PodBasis pod;
    pod.singular_values = eig.values.head(rank).cwiseSqrt();
    const auto k = static_cast<Eigen::Index>(n_s);
    if (row_side) {
        pod.basis = eig.vectors.leftCols(k);
    } else {
        pod.basis = s * eig.vectors.leftCols(k);
        for (Eigen::Index j = 0; j < k; ++j) pod.basis.col(j) /= pod.singular_values(j);
        linalg::reorthonormalize(pod.basis);
    }
    return pod;
}

PodBasis compute_pod(const SnapshotMatrix& snapshots, std::size_t n_s) {
    return compute_pod(snapshots.data(), n_s);
}

Eigen::MatrixXd pod_encode(const PodBasis& pod, const Eigen::MatrixXd& states) {
    if (states.rows() != pod.basis.rows()) {
        throw ShapeError("pod_encode: states have " + std::to_string(states.rows()) + " rows, basis has " +
                         std::to_string(pod.basis.rows()));
    }
    return pod.basis.transpose() * states;
}

Eigen::MatrixXd pod_decode(const PodBasis& pod, const Eigen::MatrixXd& latent) {
    if (latent.rows() != pod.basis.cols()) {
        throw ShapeError("pod_decode: latent states have " + std::to_string(latent.rows()) + " rows, basis has " +
                         std::to_string(pod.basis.cols()) + " columns");
    }
    return pod.basis * latent;
}

double singular_value_mass(const PodBasis& pod, std::size_t n_s) {
    const double total = pod.singular_values.sum();
    if (total <= 0.0) return 0.0;
    const auto k = static_cast<Eigen::Index>(std::min(n_s, pod.rank()));
    if (k == pod.singular_values.size()) return 1.0;
    return pod.singular_values.head(k).sum() / total;
}

void save(const PodBasis& pod, const std::filesystem::path& path) {
    io::BinaryWriter w(path, kPodMagic, kPodVersion);
    w.u64(pod.full_dim());
    w.u64(pod.latent_dim());
    w.u64(pod.rank());
    w.f64s(std::span<const double>(pod.singular_values.data(), pod.rank()));
    w.matrix(pod.basis);
    w.finish();
}

PodBasis load_pod(const std::filesystem::path& path) {
    io::BinaryReader r(path, kPodMagic, kPodVersion);
    const auto rows = r.dim("N_s", 0);
    const auto n_s = r.dim("n_s", 0);
    const auto rank = r.dim("rank", 8);
    PodBasis pod;
    const auto sv = r.f64s(rank);
    pod.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
    if (rows * n_s * 8 != r.remaining()) {
        throw FormatError("'" + path.string() + "': basis payload does not match header dimensions");
    }
    pod.basis = r.matrix(rows, n_s);
    r.expect_end();
    return pod;
}

}  // namespace lasdi
