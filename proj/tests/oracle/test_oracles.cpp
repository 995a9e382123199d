// Cross-checks of the core numerics against independent implementations.
// The acceptance binary runs this suite and also holds it to a time budget.

#include "lasdi/autoencoder.hpp"
#include "lasdi/dopri.hpp"
#include "lasdi/ensemble.hpp"
#include "lasdi/interpolation.hpp"
#include "lasdi/pod.hpp"
#include "lasdi/regression.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lasdi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd gaussian(Eigen::Index m, Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    MatrixXd a(m, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = d(rng);
    return a;
}

MatrixXd linear_trajectory(const Eigen::Matrix2d& a, const Eigen::Vector2d& z0, double dt, std::size_t n) {
    MatrixXd z(2, static_cast<Eigen::Index>(n + 1));
    for (std::size_t k = 0; k <= n; ++k) z.col(static_cast<Eigen::Index>(k)) = oracle::expm2(a, dt * k) * z0;
    return z;
}

}  // namespace

TEST(Oracle, PlantedLinearOdeIsRecovered) {
    Eigen::Matrix2d a;
    a << -0.8, 0.6, -0.3, -0.2;
    const double dt = 1e-3;
    const MatrixXd z = linear_trajectory(a, Eigen::Vector2d(1.0, -0.7), dt, 1000);
    LibrarySpec spec;
    spec.latent_dim = 2;
    const auto c = fit_single(z, spec, dt);
    // xi rows: constant, z1, z2; column j holds dz_j/dt, so the linear block is A^T
    EXPECT_LT(c.xi.row(0).cwiseAbs().maxCoeff(), 1e-4);
    const MatrixXd recovered = c.xi.bottomRows(2).transpose();
    EXPECT_LT((recovered - MatrixXd(a)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Oracle, PodMatchesDenseSvd) {
    const MatrixXd s = gaussian(50, 30, 17);
    const auto svd = oracle::jacobi_svd(s);
    for (std::size_t n_s : {1u, 5u, 12u, 29u}) {
        const auto pod = compute_pod(s, n_s);
        const double rom = (s - pod.basis * (pod.basis.transpose() * s)).norm();
        const auto k = static_cast<Eigen::Index>(n_s);
        const MatrixXd uk = svd.u.leftCols(k);
        const double ref = (s - uk * (uk.transpose() * s)).norm();
        EXPECT_NEAR(rom, ref, 1e-8) << "n_s=" << n_s;
        // Eckart-Young: the residual is carried by the discarded singular values
        EXPECT_NEAR(rom, svd.s.tail(svd.s.size() - k).norm(), 1e-8) << "n_s=" << n_s;
        for (Eigen::Index i = 0; i < k; ++i) EXPECT_NEAR(pod.singular_values[i], svd.s[i], 1e-8);
        // same subspace: the projectors agree
        EXPECT_LT((pod.basis * pod.basis.transpose() - uk * uk.transpose()).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Oracle, PodEncodeDecodeErrorIsTheDiscardedMass) {
    // wide matrix: exercises the other Gram-matrix branch
    const MatrixXd s = gaussian(25, 60, 23);
    const auto svd = oracle::jacobi_svd(s.transpose());
    const auto pod = compute_pod(s, 7);
    const double err = (pod_decode(pod, pod_encode(pod, s)) - s).norm();
    EXPECT_NEAR(err, svd.s.tail(svd.s.size() - 7).norm(), 1e-8);
}

TEST(Oracle, AutoencoderGradientMatchesFiniteDifferences) {
    SpatialGrid g;
    g.axes = {Axis{0.0, 1.0, 7}, Axis{0.0, 1.0, 3}};
    const MatrixXd x = gaussian(21, 5, 3) * 0.5;
    for (auto act : {Activation::sigmoid, Activation::swish}) {
        auto ae = Autoencoder::initialize(build_mask(g, 42), 6, 3, act, 5);
        ae.input_shift = -0.2;
        ae.input_scale = 1.7;
        VectorXd grad;
        ae_loss_gradient(ae, x, grad);
        auto params = ae_parameters(ae);
        ASSERT_EQ(static_cast<std::size_t>(grad.size()), params.size());
        VectorXd fd(grad.size());
        VectorXd dummy;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = *params[i];
            const double h = 1e-6 * std::max(1.0, std::abs(saved));
            *params[i] = saved + h;
            const double up = ae_loss_gradient(ae, x, dummy);
            *params[i] = saved - h;
            const double down = ae_loss_gradient(ae, x, dummy);
            *params[i] = saved;
            fd[static_cast<Eigen::Index>(i)] = (up - down) / (2.0 * h);
        }
        EXPECT_LT((grad - fd).norm() / grad.norm(), 1e-5) << to_string(act);
        // the loss reported with the gradient is the reconstruction MSE in scaled units
        EXPECT_NEAR(ae_loss_gradient(ae, x, dummy), ae_mse(ae, x) / (1.7 * 1.7), 1e-14);
    }
}

TEST(Oracle, GlobalEqualsLocalWithAllTrainingPoints) {
    std::vector<ParameterPoint> params;
    MatrixXd data(2, 5 * 101);
    for (int k = 0; k < 5; ++k) {
        Eigen::Matrix2d a;
        a << -0.5 - 0.1 * k, 0.4, -0.3, -0.1 * k;
        params.push_back(ParameterPoint{{0.1 * k, 1.0 - 0.05 * k}});
        data.middleCols(k * 101, 101) = linear_trajectory(a, Eigen::Vector2d(1.0, 0.5 * k), 0.01, 100);
    }
    const LatentSnapshotMatrix l(data, params, 100);
    LibrarySpec spec;
    spec.latent_dim = 2;
    spec.poly_degree = 2;
    for (bool rescale : {false, true}) {
        const auto g = DiEnsemble::fit(l, spec, 0.01, DiStrategy{}, rescale);
        const auto loc = DiEnsemble::fit(l, spec, 0.01, DiStrategy{DiKind::local, 5}, rescale);
        for (const auto& q : {ParameterPoint{{0.05, 0.9}}, ParameterPoint{{0.4, 0.8}}}) {
            EXPECT_LT((g.coefficients(q)->xi - loc.coefficients(q)->xi).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Oracle, InterpolatorsAreExactAtNodes) {
    std::vector<ParameterPoint> nodes;
    std::vector<MatrixXd> values;
    MatrixXd stacked(9, 6);
    int k = 0;
    for (double a : {0.7, 0.8, 0.9}) {
        for (double w : {0.9, 1.0, 1.1}) {
            nodes.push_back(ParameterPoint{{a, w}});
            values.push_back(gaussian(3, 2, static_cast<unsigned>(100 + k)));
            stacked.row(k) = Eigen::Map<const Eigen::RowVectorXd>(values.back().data(), 6);
            ++k;
        }
    }
    const RbfInterpolant rbf(nodes, stacked);
    for (int i = 0; i < 9; ++i) {
        EXPECT_LT((rbf.evaluate(nodes[static_cast<std::size_t>(i)]) - stacked.row(i).transpose()).cwiseAbs().maxCoeff(),
                  1e-8);
    }
    // every cell of the grid, queried at each of its corners
    for (int ia = 0; ia < 2; ++ia) {
        for (int iw = 0; iw < 2; ++iw) {
            const std::vector<int> idx{ia * 3 + iw, (ia + 1) * 3 + iw, ia * 3 + iw + 1, (ia + 1) * 3 + iw + 1};
            std::vector<ParameterPoint> corners;
            std::vector<MatrixXd> vals;
            for (int i : idx) {
                corners.push_back(nodes[static_cast<std::size_t>(i)]);
                vals.push_back(values[static_cast<std::size_t>(i)]);
            }
            for (std::size_t c = 0; c < 4; ++c) {
                EXPECT_LT((interpolate_bilinear(corners[c], corners, vals) - vals[c]).cwiseAbs().maxCoeff(), 1e-8);
            }
        }
    }
}

TEST(Oracle, DopriMatchesAnalyticExponential) {
    OdeSolverConfig cfg;
    cfg.rtol = 1e-8;
    cfg.atol = 1e-8;
    const auto z = integrate_dopri([](const VectorXd& x, VectorXd& dx) { dx = -x; }, VectorXd::Ones(1),
                                   TimeGrid{1e-3, 1000}, cfg);
    EXPECT_NEAR(z(0, 1000), std::exp(-1.0), 1e-7);

    Eigen::Matrix2d a;
    a << -1.0, 0.5, 0.2, -2.0;
    const auto y = integrate_dopri([&](const VectorXd& x, VectorXd& dx) { dx = a * x; },
                                   (VectorXd(2) << 1.0, -1.0).finished(), TimeGrid{0.01, 100}, cfg);
    const Eigen::Vector2d ref = oracle::expm2(a, 1.0) * Eigen::Vector2d(1.0, -1.0);
    EXPECT_LT((y.col(100) - VectorXd(ref)).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Oracle, JacobiSvdReferenceIsItselfConsistent) {
    // guards the oracle: U S V^T reproduces the input and U, V are orthonormal
    const MatrixXd s = gaussian(12, 7, 99);
    const auto svd = oracle::jacobi_svd(s);
    EXPECT_LT((svd.u * svd.s.asDiagonal() * svd.v.transpose() - s).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((svd.u.transpose() * svd.u - MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((svd.v.transpose() * svd.v - MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Oracle, ClosedFormExponentialMatchesTaylorSeries) {
    // guards the oracle on real, complex and repeated eigenvalues
    Eigen::Matrix2d cases[3];
    cases[0] << -1.0, 0.5, 0.2, -2.0;
    cases[1] << -0.8, 0.6, -0.3, -0.2;
    cases[2] << -1.0, 1.0, 0.0, -1.0;
    for (const auto& a : cases) {
        Eigen::Matrix2d sum = Eigen::Matrix2d::Identity(), term = Eigen::Matrix2d::Identity();
        for (int k = 1; k < 40; ++k) {
            term = term * a * 1.3 / static_cast<double>(k);
            sum += term;
        }
        EXPECT_LT((oracle::expm2(a, 1.3) - sum).cwiseAbs().maxCoeff(), 1e-13);
    }
}
