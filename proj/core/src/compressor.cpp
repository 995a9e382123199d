#include "lasdi/compressor.hpp"

#include "lasdi/error.hpp"

#include <array>
#include <fstream>

namespace lasdi {

std::size_t Compressor::latent_dim() const {
    return is_pod() ? pod().latent_dim() : autoencoder().latent_dim();
}

std::size_t Compressor::full_dim() const { return is_pod() ? pod().full_dim() : autoencoder().full_dim(); }

Eigen::MatrixXd Compressor::encode(const Eigen::MatrixXd& states) const {
    return is_pod() ? pod_encode(pod(), states) : ae_encode(autoencoder(), states);
}

Eigen::MatrixXd Compressor::decode(const Eigen::MatrixXd& latent) const {
    return is_pod() ? pod_decode(pod(), latent) : ae_decode(autoencoder(), latent);
}

void Compressor::save(const std::filesystem::path& path) const {
    if (is_pod()) lasdi::save(pod(), path);
    else lasdi::save(autoencoder(), path);
}

Compressor Compressor::load(const std::filesystem::path& path) {
    std::array<char, 8> magic{};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
        in.read(magic.data(), magic.size());
        if (!in) throw FormatError("'" + path.string() + "' is too short to hold a header");
    }
    const std::string m(magic.data(), magic.size());
    if (m == "LASDIPOD") return Compressor(load_pod(path));
    if (m == "LASDIAEN") return Compressor(load_autoencoder(path));
    throw FormatError("'" + path.string() + "' is neither a POD basis nor an autoencoder file");
}

LatentSnapshotMatrix encode_snapshots(const Compressor& c, const SnapshotMatrix& s) {
    return LatentSnapshotMatrix(c.encode(s.data()), s.params(), s.n_time(), s.meta());
}

}  // namespace lasdi
