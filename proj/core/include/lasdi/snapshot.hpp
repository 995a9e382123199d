#pragma once

#include "lasdi/fom.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lasdi {

/// Metadata shared by full-state and latent snapshot matrices.
struct SnapshotMeta {
    std::optional<ProblemKind> kind;  ///< empty for externally ingested data
    SpatialGrid grid;                 ///< empty axes for external or latent data
    double dt = 0.0;                  ///< 0 when unknown
};

/// Trajectories for n_param training points placed side by side.
///
/// Block k (0-based) spans columns k*(n_time+1) .. (k+1)*(n_time+1)-1 and
/// holds the trajectory for params[k]. The Tag distinguishes full-state from
/// latent matrices at compile time; layout and persistence are identical.
template <class Tag>
class BlockSnapshots {
public:
    BlockSnapshots() = default;
    /// Validates the block structure. Throws ShapeError or DuplicateError.
    BlockSnapshots(Eigen::MatrixXd data, std::vector<ParameterPoint> params, std::size_t n_time,
                   SnapshotMeta meta = {});

    const Eigen::MatrixXd& data() const { return data_; }
    const std::vector<ParameterPoint>& params() const { return params_; }
    const SnapshotMeta& meta() const { return meta_; }

    std::size_t n_rows() const { return static_cast<std::size_t>(data_.rows()); }
    std::size_t n_time() const { return n_time_; }
    std::size_t n_param() const { return params_.size(); }
    std::size_t block_width() const { return n_time_ + 1; }

    /// Block for training index k. Throws IndexError when k >= n_param().
    using ConstBlock = Eigen::Block<const Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true>;
    ConstBlock block(std::size_t k) const;

    bool operator==(const BlockSnapshots& other) const;

private:
    Eigen::MatrixXd data_;
    std::vector<ParameterPoint> params_;
    std::size_t n_time_ = 0;
    SnapshotMeta meta_;
};

struct FullStateTag {};
struct LatentTag {};

using SnapshotMatrix = BlockSnapshots<FullStateTag>;
using LatentSnapshotMatrix = BlockSnapshots<LatentTag>;

extern template class BlockSnapshots<FullStateTag>;
extern template class BlockSnapshots<LatentTag>;

/// Concatenates trajectories in input order.
/// Throws ShapeError on an empty list or mismatched shapes, DuplicateError on
/// repeated parameter points.
SnapshotMatrix assemble(const std::vector<StateTrajectory>& trajectories, SnapshotMeta meta = {});

/// Binary persistence (.lsnap). Round trips are bit-exact.
void save(const SnapshotMatrix& m, const std::filesystem::path& path);
void save(const LatentSnapshotMatrix& m, const std::filesystem::path& path);
SnapshotMatrix load_snapshots(const std::filesystem::path& path);
LatentSnapshotMatrix load_latent(const std::filesystem::path& path);

/// CSV with one row per state entry and a header of "k<block>_t<step>" labels.
/// Values are written in shortest round-trip form.
void write_csv(const Eigen::MatrixXd& data, std::size_t n_time, const std::filesystem::path& path);

/// Reads a numeric CSV. A first line holding any non-numeric field is treated
/// as a header and skipped. Throws NonFiniteError naming the first NaN/Inf cell
/// (0-based data row and column).
Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);

/// Layout of an externally generated snapshot file.
struct IngestDescriptor {
    enum class Format { csv, raw };

    std::size_t n_space = 0;
    std::size_t n_time = 0;
    std::size_t n_param = 0;
    std::vector<ParameterPoint> params;
    double dt = 0.0;
    Format format = Format::csv;
};

/// Parses a key=value descriptor. Required keys: n_space, n_time, n_param,
/// params (points separated by ';', components by whitespace or ',').
/// Optional: dt, format (csv|raw). Lines starting with '#' are comments.
IngestDescriptor read_descriptor(const std::filesystem::path& path);
void write_descriptor(const IngestDescriptor& d, const std::filesystem::path& path);

/// Loads CSV or raw little-endian float64 column-major data and validates it
/// against the descriptor.
SnapshotMatrix ingest_external(const std::filesystem::path& data_path, const IngestDescriptor& d);

}  // namespace lasdi
