#pragma once

#include "lasdi/fom.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace lasdi {

enum class Activation { sigmoid, swish };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Connectivity of the final decoder layer (output DOF x hidden unit).
///
/// Hidden unit j is attached to grid node j mod node_count. Output DOF i,
/// located at node n, connects to every hidden unit attached to n or to a
/// node adjacent to n along one axis. All components of a vector field share
/// the same pattern. Stored values are 1.
/// Throws ShapeError when hidden_width is zero or not a multiple of the node count.
SparseRowMatrix build_mask(const SpatialGrid& grid, std::size_t hidden_width);

struct AutoencoderConfig {
    std::size_t latent_dim = 4;
    std::size_t hidden_width = 0;   ///< decoder hidden width, 0 selects the node count
    std::size_t encoder_width = 0;  ///< encoder hidden width, 0 selects hidden_width
    Activation activation = Activation::sigmoid;
    std::size_t epochs = 10000;
    double learning_rate = 1e-3;
    std::size_t batch_size = 0;     ///< 0 trains full batch
    std::size_t train_stride = 1;   ///< use every stride-th snapshot column
    std::uint64_t seed = 0;
    bool minmax_scaling = false;
};

struct TrainingRecord {
    std::size_t epochs = 0;
    double initial_mse = 0.0;
    double final_mse = 0.0;
    std::uint64_t seed = 0;
};

/// Shallow encoder N -> h_e -> n_s and masked shallow decoder n_s -> h -> N.
/// Hidden layers use the configured activation, output layers are linear.
struct Autoencoder {
    Eigen::MatrixXd enc_w1;  ///< h_e x N
    Eigen::VectorXd enc_b1;
    Eigen::MatrixXd enc_w2;  ///< n_s x h_e
    Eigen::VectorXd enc_b2;
    Eigen::MatrixXd dec_w1;  ///< h x n_s
    Eigen::VectorXd dec_b1;
    SparseRowMatrix dec_w2;  ///< N x h, only masked entries are stored
    Eigen::VectorXd dec_b2;
    Activation activation = Activation::sigmoid;
    double input_shift = 0.0;  ///< scaled = (x - shift) / scale
    double input_scale = 1.0;
    TrainingRecord record;

    std::size_t full_dim() const { return static_cast<std::size_t>(enc_w1.cols()); }
    std::size_t latent_dim() const { return static_cast<std::size_t>(enc_w2.rows()); }
    std::size_t parameter_count() const;

    /// Fresh network with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
    static Autoencoder initialize(const SparseRowMatrix& mask, std::size_t encoder_width,
                                  std::size_t latent_dim, Activation activation, std::uint64_t seed);
};

/// Trains on the snapshot columns by Adam on the reconstruction MSE.
/// The returned network is the last iterate or the best periodic checkpoint,
/// whichever reconstructs better, so final MSE <= initial MSE.
/// Throws TrainingError when the loss becomes non-finite.
Autoencoder train_autoencoder(const Eigen::MatrixXd& snapshots, const SpatialGrid& grid,
                              const AutoencoderConfig& config);

/// Continues training an existing network. Used by train_autoencoder and tests.
void train_autoencoder(Autoencoder& ae, const Eigen::MatrixXd& snapshots, const AutoencoderConfig& config);

/// Column-wise forward passes. Throw ShapeError or NonFiniteError on bad input.
Eigen::MatrixXd ae_encode(const Autoencoder& ae, const Eigen::MatrixXd& states);
Eigen::MatrixXd ae_decode(const Autoencoder& ae, const Eigen::MatrixXd& latent);

/// Mean squared reconstruction error over all entries of `states`.
double ae_mse(const Autoencoder& ae, const Eigen::MatrixXd& states);

/// Training loss and its gradient with respect to every trainable scalar, in
/// the order of ae_parameters(). The loss is the MSE in scaled coordinates,
/// i.e. ae_mse / input_scale^2. Exposed for gradient checks.
double ae_loss_gradient(const Autoencoder& ae, const Eigen::MatrixXd& states, Eigen::VectorXd& gradient);

/// Pointers to every trainable scalar: enc_w1, enc_b1, enc_w2, enc_b2,
/// dec_w1, dec_b1, stored dec_w2 values, dec_b2 (matrices column-major).
std::vector<double*> ae_parameters(Autoencoder& ae);

/// .lae persistence. The decoder mask is stored as bit-packed rows.
void save(const Autoencoder& ae, const std::filesystem::path& path);
Autoencoder load_autoencoder(const std::filesystem::path& path);

}  // namespace lasdi
