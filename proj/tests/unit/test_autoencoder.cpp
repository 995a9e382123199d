#include "lasdi/autoencoder.hpp"
#include "lasdi/compressor.hpp"
#include "lasdi/error.hpp"
#include "lasdi/snapshot.hpp"

#include "tempdir.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lasdi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SpatialGrid line(std::size_t nodes) {
    SpatialGrid g;
    g.axes = {Axis{0.0, 1.0, nodes}};
    return g;
}

Eigen::MatrixXd dense(const SparseRowMatrix& m) { return MatrixXd(m); }

MatrixXd smooth_snapshots(std::size_t n, std::size_t cols) {
    MatrixXd s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(n - 1);
            s(i, j) = std::exp(-std::pow(x - 0.3 - 0.02 * j, 2) / 0.02);
        }
    }
    return s;
}

// The 4-point 1D Burgers training set, solved once per test binary.
const SnapshotMatrix& burgers4() {
    static const SnapshotMatrix s = [] {
        const auto p = PdeProblem::make(ProblemKind::burgers1d);
        std::vector<StateTrajectory> ts;
        for (double a : {0.7, 0.9}) {
            for (double w : {0.9, 1.1}) ts.push_back(solve_fom(p, ParameterPoint{{a, w}}));
        }
        return assemble(ts, SnapshotMeta{p.kind, p.grid, p.time.dt});
    }();
    return s;
}

AutoencoderConfig burgers_config() {
    AutoencoderConfig c;
    c.latent_dim = 4;
    c.hidden_width = 1001;
    c.encoder_width = 100;
    c.epochs = 200;
    c.batch_size = 32;
    c.train_stride = 10;
    c.seed = 0;
    return c;
}

}  // namespace

TEST(Mask, OneDimensionalIsTridiagonal) {
    const MatrixXd m = dense(build_mask(line(5), 5));
    MatrixXd expected = MatrixXd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) {
        expected(i, i) = 1.0;
        if (i > 0) expected(i, i - 1) = 1.0;
        if (i < 4) expected(i, i + 1) = 1.0;
    }
    EXPECT_EQ(m, expected);
}

TEST(Mask, InteriorTwoDimensionalNodeHasFiveConnections) {
    SpatialGrid g;
    g.axes = {Axis{0.0, 1.0, 4}, Axis{0.0, 1.0, 4}};
    const auto m = build_mask(g, 16);
    const std::size_t interior = 1 * 4 + 1;
    const std::size_t corner = 0;
    EXPECT_EQ(m.row(static_cast<Eigen::Index>(interior)).nonZeros(), 5);
    EXPECT_EQ(m.row(static_cast<Eigen::Index>(corner)).nonZeros(), 3);
}

TEST(Mask, EveryRowHasItsSelfConnection) {
    SpatialGrid g;
    g.axes = {Axis{0.0, 1.0, 5}, Axis{0.0, 1.0, 3}};
    g.components = 2;
    const MatrixXd m = dense(build_mask(g, 30));
    EXPECT_EQ(m.rows(), 30);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        EXPECT_GE(m.row(i).sum(), 1.0);
        EXPECT_EQ(m(i, i % 15), 1.0) << "row " << i;
    }
}

TEST(Mask, WiderHiddenLayerRepeatsThePattern) {
    const MatrixXd m = dense(build_mask(line(5), 15));
    EXPECT_EQ(m.leftCols(5), m.middleCols(5, 5));
    EXPECT_EQ(m.leftCols(5), m.rightCols(5));
}

TEST(Mask, InvalidWidthsThrow) {
    EXPECT_THROW(build_mask(line(5), 0), ShapeError);
    EXPECT_THROW(build_mask(line(5), 7), ShapeError);
}

TEST(Activation, NamesRoundTrip) {
    EXPECT_EQ(parse_activation(to_string(Activation::sigmoid)), Activation::sigmoid);
    EXPECT_EQ(parse_activation(to_string(Activation::swish)), Activation::swish);
    EXPECT_THROW(parse_activation("relu"), Error);
}

TEST(Autoencoder, InitializationIsSeeded) {
    const auto mask = build_mask(line(8), 8);
    const auto a = Autoencoder::initialize(mask, 6, 2, Activation::sigmoid, 11);
    const auto b = Autoencoder::initialize(mask, 6, 2, Activation::sigmoid, 11);
    const auto c = Autoencoder::initialize(mask, 6, 2, Activation::sigmoid, 12);
    EXPECT_EQ(a.enc_w1, b.enc_w1);
    EXPECT_EQ(dense(a.dec_w2), dense(b.dec_w2));
    EXPECT_NE(a.enc_w1, c.enc_w1);
    // weights lie within the fan-in bound
    EXPECT_LE(a.enc_w1.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(8.0));
    EXPECT_LE(a.dec_w1.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(2.0));
}

TEST(Autoencoder, ParameterCountMatchesPointers) {
    const auto mask = build_mask(line(8), 16);
    auto ae = Autoencoder::initialize(mask, 6, 3, Activation::swish, 1);
    const std::size_t expected = 6 * 8 + 6 + 3 * 6 + 3 + 16 * 3 + 16 + static_cast<std::size_t>(mask.nonZeros()) + 8;
    EXPECT_EQ(ae.parameter_count(), expected);
    EXPECT_EQ(ae_parameters(ae).size(), expected);
}

TEST(Autoencoder, EncodeOfZeroIsTheBiasPath) {
    const auto mask = build_mask(line(6), 6);
    const auto ae = Autoencoder::initialize(mask, 4, 2, Activation::sigmoid, 3);
    const VectorXd z = ae_encode(ae, VectorXd::Zero(6));
    VectorXd h(4);
    for (int i = 0; i < 4; ++i) h[i] = 1.0 / (1.0 + std::exp(-ae.enc_b1[i]));
    const VectorXd expected = ae.enc_w2 * h + ae.enc_b2;
    EXPECT_LT((z - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Autoencoder, SwishForwardPass) {
    const auto mask = build_mask(line(6), 6);
    const auto ae = Autoencoder::initialize(mask, 4, 2, Activation::swish, 3);
    const VectorXd z = VectorXd::LinSpaced(2, -0.5, 0.7);
    VectorXd a = ae.dec_w1 * z + ae.dec_b1;
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = a[i] / (1.0 + std::exp(-a[i]));
    const VectorXd expected = MatrixXd(ae.dec_w2) * a + ae.dec_b2;
    EXPECT_LT((ae_decode(ae, z) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Autoencoder, EncodeIsColumnwiseIndependent) {
    const auto mask = build_mask(line(10), 10);
    const auto ae = Autoencoder::initialize(mask, 5, 3, Activation::sigmoid, 4);
    const MatrixXd x = smooth_snapshots(10, 6);
    const MatrixXd batched = ae_encode(ae, x);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        EXPECT_LT((batched.col(j) - ae_encode(ae, x.col(j))).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Autoencoder, BadInputIsRejected) {
    const auto mask = build_mask(line(6), 6);
    const auto ae = Autoencoder::initialize(mask, 4, 2, Activation::sigmoid, 3);
    EXPECT_THROW(ae_encode(ae, MatrixXd::Zero(5, 1)), ShapeError);
    EXPECT_THROW(ae_decode(ae, MatrixXd::Zero(3, 1)), ShapeError);
    MatrixXd x = MatrixXd::Zero(6, 1);
    x(2, 0) = std::nan("");
    EXPECT_THROW(ae_encode(ae, x), NonFiniteError);
}

TEST(Training, ZeroEpochsIsANoOp) {
    const auto mask = build_mask(line(12), 12);
    const auto init = Autoencoder::initialize(mask, 6, 2, Activation::sigmoid, 5);
    auto ae = init;
    const MatrixXd x = smooth_snapshots(12, 8);
    AutoencoderConfig c;
    c.epochs = 0;
    train_autoencoder(ae, x, c);
    EXPECT_EQ(ae.enc_w1, init.enc_w1);
    EXPECT_EQ(ae.dec_b2, init.dec_b2);
    EXPECT_EQ(ae_mse(ae, x), ae_mse(init, x));
}

TEST(Training, MemorizesASingleRepeatedColumn) {
    MatrixXd x(16, 6);
    const MatrixXd col = smooth_snapshots(16, 1);
    for (int j = 0; j < 6; ++j) x.col(j) = col.col(0);
    AutoencoderConfig c;
    c.latent_dim = 2;
    c.epochs = 3000;
    c.learning_rate = 1e-2;
    c.seed = 2;
    const auto ae = train_autoencoder(x, line(16), c);
    EXPECT_LT(ae_mse(ae, x), 1e-6 * col.squaredNorm() / 16.0);
}

TEST(Training, FinalNeverWorseThanInitial) {
    const MatrixXd x = smooth_snapshots(20, 12);
    AutoencoderConfig c;
    c.latent_dim = 2;
    c.epochs = 60;
    c.learning_rate = 5e-2;  // aggressive on purpose; checkpointing keeps the best iterate
    c.seed = 9;
    const auto ae = train_autoencoder(x, line(20), c);
    EXPECT_LE(ae.record.final_mse, ae.record.initial_mse);
    EXPECT_EQ(ae.record.epochs, 60u);
    EXPECT_EQ(ae.record.seed, 9u);
}

TEST(Training, SameSeedSameNetwork) {
    const MatrixXd x = smooth_snapshots(20, 12);
    AutoencoderConfig c;
    c.latent_dim = 2;
    c.epochs = 20;
    c.batch_size = 4;
    c.seed = 13;
    const auto a = train_autoencoder(x, line(20), c);
    const auto b = train_autoencoder(x, line(20), c);
    EXPECT_EQ(a.enc_w1, b.enc_w1);
    EXPECT_EQ(dense(a.dec_w2), dense(b.dec_w2));
}

TEST(Training, MinmaxScalingIsInvertedOnDecode) {
    MatrixXd x = smooth_snapshots(20, 12);
    x = (x.array() * 50.0 + 10.0).matrix();
    AutoencoderConfig c;
    c.latent_dim = 3;
    c.epochs = 400;
    c.learning_rate = 1e-2;
    c.minmax_scaling = true;
    const auto ae = train_autoencoder(x, line(20), c);
    EXPECT_DOUBLE_EQ(ae.input_shift, x.minCoeff());
    EXPECT_DOUBLE_EQ(ae.input_scale, x.maxCoeff() - x.minCoeff());
    // reconstructions live in the original units
    const MatrixXd y = ae_decode(ae, ae_encode(ae, x));
    EXPECT_LT((y - x).cwiseAbs().maxCoeff(), 0.25 * (x.maxCoeff() - x.minCoeff()));
}

TEST(Training, Burgers1dSeededBaseline) {
    const auto& s = burgers4();
    const auto ae = train_autoencoder(s.data(), s.meta().grid, burgers_config());
    const double ratio = ae.record.final_mse / ae.record.initial_mse;
    EXPECT_LE(ratio, 1e-2);
    // recorded from the first verified run of this configuration (seed 0)
    EXPECT_NEAR(ae.record.final_mse, 3.0316e-3, 0.05 * 3.0316e-3);

    // AE reconstruction of a training column stays within the trained MSE band
    const Compressor c(ae);
    const auto block = s.block(2);
    const MatrixXd latent = c.encode(block);
    const MatrixXd rebuilt = c.decode(latent);
    const double mse = (rebuilt - block).squaredNorm() / static_cast<double>(block.size());
    EXPECT_LE(mse, 4.0 * ae.record.final_mse);

    // the projected initial state equals column 0 of the latent block
    const auto p = PdeProblem::make(ProblemKind::burgers1d);
    const VectorXd u0 = initial_condition(p, s.params()[2]);
    EXPECT_LT((c.encode(u0) - latent.col(0)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(AutoencoderIo, RoundTripIsBitExact) {
    test::TempDir dir;
    const auto mask = build_mask(line(9), 18);
    auto ae = Autoencoder::initialize(mask, 5, 3, Activation::swish, 21);
    ae.input_shift = -0.25;
    ae.input_scale = 4.0;
    ae.record.epochs = 17;
    save(ae, dir / "n.lae");
    const auto back = load_autoencoder(dir / "n.lae");
    EXPECT_EQ(back.enc_w1, ae.enc_w1);
    EXPECT_EQ(back.enc_b2, ae.enc_b2);
    EXPECT_EQ(dense(back.dec_w2), dense(ae.dec_w2));
    EXPECT_EQ(back.activation, Activation::swish);
    EXPECT_EQ(back.input_scale, 4.0);
    EXPECT_EQ(back.record.epochs, 17u);
    const auto c = Compressor::load(dir / "n.lae");
    EXPECT_FALSE(c.is_pod());
    EXPECT_EQ(c.latent_dim(), 3u);
}

TEST(AutoencoderIo, TruncatedFileIsAFormatError) {
    test::TempDir dir;
    const auto ae = Autoencoder::initialize(build_mask(line(9), 9), 5, 3, Activation::sigmoid, 21);
    save(ae, dir / "n.lae");
    std::filesystem::resize_file(dir / "n.lae", std::filesystem::file_size(dir / "n.lae") / 2);
    EXPECT_THROW(load_autoencoder(dir / "n.lae"), FormatError);
}
