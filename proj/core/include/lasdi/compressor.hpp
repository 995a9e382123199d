#pragma once

#include "lasdi/autoencoder.hpp"
#include "lasdi/pod.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <variant>

namespace lasdi {

/// Either a POD basis (linear subspace) or an autoencoder (nonlinear manifold).
class Compressor {
public:
    Compressor(PodBasis pod) : model_(std::move(pod)) {}
    Compressor(Autoencoder ae) : model_(std::move(ae)) {}

    bool is_pod() const { return std::holds_alternative<PodBasis>(model_); }
    const PodBasis& pod() const { return std::get<PodBasis>(model_); }
    const Autoencoder& autoencoder() const { return std::get<Autoencoder>(model_); }

    std::size_t latent_dim() const;
    std::size_t full_dim() const;

    /// Column-wise compression and decompression.
    Eigen::MatrixXd encode(const Eigen::MatrixXd& states) const;
    Eigen::MatrixXd decode(const Eigen::MatrixXd& latent) const;

    /// Writes .lpod or .lae depending on the model.
    void save(const std::filesystem::path& path) const;
    /// Detects the model kind from the file magic.
    static Compressor load(const std::filesystem::path& path);

private:
    std::variant<PodBasis, Autoencoder> model_;
};

/// Encodes every block of a snapshot matrix, keeping its metadata.
LatentSnapshotMatrix encode_snapshots(const Compressor& c, const SnapshotMatrix& s);

}  // namespace lasdi
