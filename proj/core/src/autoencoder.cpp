#include "lasdi/autoencoder.hpp"

#include "binary_io.hpp"
#include "lasdi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>

namespace lasdi {

namespace {

constexpr io::Magic kAeMagic{'L', 'A', 'S', 'D', 'I', 'A', 'E', 'N'};
constexpr std::uint32_t kAeVersion = 1;
constexpr std::size_t kCheckpointEvery = 50;

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd activate(Activation act, const MatrixXd& a) {
    const ArrayXXd s = (1.0 + (-a.array()).exp()).inverse();
    if (act == Activation::sigmoid) return s.matrix();
    return (a.array() * s).matrix();
}

// Derivative of the activation evaluated at pre-activation a.
MatrixXd activate_prime(Activation act, const MatrixXd& a) {
    const ArrayXXd s = (1.0 + (-a.array()).exp()).inverse();
    if (act == Activation::sigmoid) return (s * (1.0 - s)).matrix();
    return (s + a.array() * s * (1.0 - s)).matrix();
}

struct Forward {
    MatrixXd a1, h1, z, a2, h2, y;  // y in scaled units
};

Forward forward(const Autoencoder& ae, const MatrixXd& xs) {
    Forward f;
    f.a1 = (ae.enc_w1 * xs).colwise() + ae.enc_b1;
    f.h1 = activate(ae.activation, f.a1);
    f.z = (ae.enc_w2 * f.h1).colwise() + ae.enc_b2;
    f.a2 = (ae.dec_w1 * f.z).colwise() + ae.dec_b1;
    f.h2 = activate(ae.activation, f.a2);
    f.y = (ae.dec_w2 * f.h2).colwise() + ae.dec_b2;
    return f;
}

struct Gradients {
    MatrixXd enc_w1, enc_w2, dec_w1;
    VectorXd enc_b1, enc_b2, dec_b1, dec_w2, dec_b2;  // dec_w2 holds stored-value gradients
};

std::vector<std::span<double>> parameter_blocks(Autoencoder& ae) {
    auto span_of = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
    return {span_of(ae.enc_w1),
            span_of(ae.enc_b1),
            span_of(ae.enc_w2),
            span_of(ae.enc_b2),
            span_of(ae.dec_w1),
            span_of(ae.dec_b1),
            std::span<double>(ae.dec_w2.valuePtr(), static_cast<std::size_t>(ae.dec_w2.nonZeros())),
            span_of(ae.dec_b2)};
}

std::vector<std::span<const double>> gradient_blocks(const Gradients& g) {
    auto span_of = [](const auto& m) {
        return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
    };
    return {span_of(g.enc_w1), span_of(g.enc_b1), span_of(g.enc_w2), span_of(g.enc_b2),
            span_of(g.dec_w1), span_of(g.dec_b1), span_of(g.dec_w2), span_of(g.dec_b2)};
}

// MSE in scaled units and its gradient.
double loss_and_gradient(const Autoencoder& ae, const MatrixXd& xs, Gradients& g) {
    const Forward f = forward(ae, xs);
    const MatrixXd diff = f.y - xs;
    const double count = static_cast<double>(diff.size());
    const double loss = diff.squaredNorm() / count;

    const MatrixXd dy = (2.0 / count) * diff;
    g.dec_b2 = dy.rowwise().sum();
    {
        const MatrixXd dy_t = dy.transpose();
        const MatrixXd h2_t = f.h2.transpose();
        g.dec_w2.resize(ae.dec_w2.nonZeros());
        Index p = 0;
        for (Index i = 0; i < ae.dec_w2.outerSize(); ++i) {
            for (SparseRowMatrix::InnerIterator it(ae.dec_w2, i); it; ++it, ++p) {
                g.dec_w2(p) = dy_t.col(i).dot(h2_t.col(it.col()));
            }
        }
    }
    const MatrixXd da2 = (ae.dec_w2.transpose() * dy).cwiseProduct(activate_prime(ae.activation, f.a2));
    g.dec_w1.noalias() = da2 * f.z.transpose();
    g.dec_b1 = da2.rowwise().sum();
    const MatrixXd dz = ae.dec_w1.transpose() * da2;
    g.enc_w2.noalias() = dz * f.h1.transpose();
    g.enc_b2 = dz.rowwise().sum();
    const MatrixXd da1 = (ae.enc_w2.transpose() * dz).cwiseProduct(activate_prime(ae.activation, f.a1));
    g.enc_w1.noalias() = da1 * xs.transpose();
    g.enc_b1 = da1.rowwise().sum();
    return loss;
}

MatrixXd scale_input(const Autoencoder& ae, const MatrixXd& x) {
    if (ae.input_shift == 0.0 && ae.input_scale == 1.0) return x;
    return (x.array() - ae.input_shift) / ae.input_scale;
}

void check_input(const MatrixXd& x, std::size_t rows, const char* what) {
    if (static_cast<std::size_t>(x.rows()) != rows) {
        throw ShapeError(std::string(what) + ": input has " + std::to_string(x.rows()) + " rows, network expects " +
                         std::to_string(rows));
    }
    for (Index j = 0; j < x.cols(); ++j) {
        for (Index i = 0; i < x.rows(); ++i) {
            if (!std::isfinite(x(i, j))) {
                throw NonFiniteError(std::string(what) + ": non-finite input at row " + std::to_string(i) +
                                         ", column " + std::to_string(j),
                                     static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
}

MatrixXd strided_columns(const MatrixXd& s, std::size_t stride) {
    if (stride <= 1) return s;
    const Index n = (s.cols() + static_cast<Index>(stride) - 1) / static_cast<Index>(stride);
    MatrixXd out(s.rows(), n);
    for (Index j = 0; j < n; ++j) out.col(j) = s.col(j * static_cast<Index>(stride));
    return out;
}

// Adjacent-node lists for each grid node (self included), first axis fastest.
std::vector<std::vector<std::size_t>> stencils(const SpatialGrid& grid) {
    const std::size_t n = grid.node_count();
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::size_t> strides(grid.dimension());
    std::size_t stride = 1;
    for (std::size_t d = 0; d < grid.dimension(); ++d) {
        strides[d] = stride;
        stride *= grid.axes[d].nodes;
    }
    for (std::size_t node = 0; node < n; ++node) {
        out[node].push_back(node);
        for (std::size_t d = 0; d < grid.dimension(); ++d) {
            const std::size_t i = (node / strides[d]) % grid.axes[d].nodes;
            if (i > 0) out[node].push_back(node - strides[d]);
            if (i + 1 < grid.axes[d].nodes) out[node].push_back(node + strides[d]);
        }
        std::sort(out[node].begin(), out[node].end());
    }
    return out;
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::sigmoid ? "sigmoid" : "swish"; }

Activation parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "swish") return Activation::swish;
    throw Error("unknown activation '" + std::string(name) + "' (expected sigmoid or swish)");
}

SparseRowMatrix build_mask(const SpatialGrid& grid, std::size_t hidden_width) {
    const std::size_t nodes = grid.node_count();
    if (nodes == 0) throw ShapeError("build_mask: grid has no nodes");
    if (hidden_width == 0 || hidden_width % nodes != 0) {
        throw ShapeError("build_mask: hidden width " + std::to_string(hidden_width) +
                         " must be a positive multiple of the node count " + std::to_string(nodes));
    }
    const std::size_t copies = hidden_width / nodes;
    const auto adj = stencils(grid);
    const std::size_t rows = grid.dof_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(rows * (2 * grid.dimension() + 1) * copies);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t node = i % nodes;
        for (std::size_t c = 0; c < copies; ++c) {
            for (std::size_t nb : adj[node]) {
                trips.emplace_back(static_cast<int>(i), static_cast<int>(c * nodes + nb), 1.0);
            }
        }
    }
    SparseRowMatrix m(static_cast<Index>(rows), static_cast<Index>(hidden_width));
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

std::size_t Autoencoder::parameter_count() const {
    return static_cast<std::size_t>(enc_w1.size() + enc_b1.size() + enc_w2.size() + enc_b2.size() + dec_w1.size() +
                                    dec_b1.size() + dec_w2.nonZeros() + dec_b2.size());
}

Autoencoder Autoencoder::initialize(const SparseRowMatrix& mask, std::size_t encoder_width, std::size_t latent_dim,
                                    Activation activation, std::uint64_t seed) {
    if (latent_dim == 0 || encoder_width == 0) throw ShapeError("autoencoder widths must be positive");
    const auto n = mask.rows();
    const auto h = mask.cols();
    const auto he = static_cast<Index>(encoder_width);
    const auto ns = static_cast<Index>(latent_dim);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](double* p, Index count, double fan_in) {
        const double bound = 1.0 / std::sqrt(fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Index i = 0; i < count; ++i) p[i] = u(rng);
    };
    Autoencoder ae;
    ae.activation = activation;
    ae.enc_w1.resize(he, n);
    ae.enc_b1.resize(he);
    ae.enc_w2.resize(ns, he);
    ae.enc_b2.resize(ns);
    ae.dec_w1.resize(h, ns);
    ae.dec_b1.resize(h);
    ae.dec_w2 = mask;
    ae.dec_w2.makeCompressed();
    ae.dec_b2.resize(n);

    fill(ae.enc_w1.data(), ae.enc_w1.size(), static_cast<double>(n));
    fill(ae.enc_b1.data(), ae.enc_b1.size(), static_cast<double>(n));
    fill(ae.enc_w2.data(), ae.enc_w2.size(), static_cast<double>(he));
    fill(ae.enc_b2.data(), ae.enc_b2.size(), static_cast<double>(he));
    fill(ae.dec_w1.data(), ae.dec_w1.size(), static_cast<double>(ns));
    fill(ae.dec_b1.data(), ae.dec_b1.size(), static_cast<double>(ns));
    for (Index i = 0; i < n; ++i) {
        const double fan_in = static_cast<double>(ae.dec_w2.outerIndexPtr()[i + 1] - ae.dec_w2.outerIndexPtr()[i]);
        const double bound = 1.0 / std::sqrt(fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (SparseRowMatrix::InnerIterator it(ae.dec_w2, i); it; ++it) it.valueRef() = u(rng);
        ae.dec_b2(i) = u(rng);
    }
    ae.record.seed = seed;
    return ae;
}

void train_autoencoder(Autoencoder& ae, const MatrixXd& snapshots, const AutoencoderConfig& config) {
    check_input(snapshots, ae.full_dim(), "train_autoencoder");
    if (!(config.learning_rate > 0.0)) throw Error("train_autoencoder: learning rate must be positive");
    const MatrixXd xs = scale_input(ae, strided_columns(snapshots, config.train_stride));
    const Index cols = xs.cols();
    if (cols == 0) throw InsufficientDataError("train_autoencoder: no snapshot columns");
    const double unit2 = ae.input_scale * ae.input_scale;

    auto params = parameter_blocks(ae);
    std::size_t total = 0;
    for (const auto& b : params) total += b.size();
    VectorXd m1 = VectorXd::Zero(static_cast<Index>(total));
    VectorXd m2 = VectorXd::Zero(static_cast<Index>(total));
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double pow1 = 1.0, pow2 = 1.0;

    const bool full_batch = config.batch_size == 0 || config.batch_size >= static_cast<std::size_t>(cols);
    std::vector<Index> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    Gradients g;
    auto adam_step = [&](const Gradients& grad) {
        pow1 *= beta1;
        pow2 *= beta2;
        const double lr_t = config.learning_rate * std::sqrt(1.0 - pow2) / (1.0 - pow1);
        const auto gb = gradient_blocks(grad);
        Index off = 0;
        for (std::size_t b = 0; b < params.size(); ++b) {
            double* p = params[b].data();
            const double* gp = gb[b].data();
            for (std::size_t i = 0; i < params[b].size(); ++i, ++off) {
                m1(off) = beta1 * m1(off) + (1.0 - beta1) * gp[i];
                m2(off) = beta2 * m2(off) + (1.0 - beta2) * gp[i] * gp[i];
                p[i] -= lr_t * m1(off) / (std::sqrt(m2(off)) + eps);
            }
        }
    };

    auto full_loss = [&]() { return (forward(ae, xs).y - xs).squaredNorm() / static_cast<double>(xs.size()); };

    const double initial = full_loss();
    Autoencoder checkpoint = ae;
    double checkpoint_loss = initial;
    double current = initial;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (full_batch) {
            current = loss_and_gradient(ae, xs, g);
            if (!std::isfinite(current)) {
                throw TrainingError("autoencoder training diverged at epoch " + std::to_string(epoch) +
                                    "; try a smaller learning rate");
            }
            if (epoch % kCheckpointEvery == 0 && current < checkpoint_loss) {
                checkpoint = ae;
                checkpoint_loss = current;
            }
            adam_step(g);
        } else {
            std::shuffle(order.begin(), order.end(), rng);
            const auto bs = static_cast<Index>(config.batch_size);
            for (Index start = 0; start < cols; start += bs) {
                const Index len = std::min(bs, cols - start);
                MatrixXd batch(xs.rows(), len);
                for (Index j = 0; j < len; ++j) batch.col(j) = xs.col(order[static_cast<std::size_t>(start + j)]);
                const double l = loss_and_gradient(ae, batch, g);
                if (!std::isfinite(l)) {
                    throw TrainingError("autoencoder training diverged at epoch " + std::to_string(epoch) +
                                        "; try a smaller learning rate");
                }
                adam_step(g);
            }
            if ((epoch + 1) % kCheckpointEvery == 0) {
                current = full_loss();
                if (current < checkpoint_loss) {
                    checkpoint = ae;
                    checkpoint_loss = current;
                }
            }
        }
    }

    double final_loss = full_loss();
    if (!std::isfinite(final_loss)) {
        throw TrainingError("autoencoder training diverged; try a smaller learning rate");
    }
    const TrainingRecord previous = ae.record;
    if (checkpoint_loss < final_loss) {
        ae = std::move(checkpoint);
        final_loss = checkpoint_loss;
    }
    ae.record.epochs = previous.epochs + config.epochs;
    ae.record.initial_mse = previous.epochs == 0 ? initial * unit2 : previous.initial_mse;
    ae.record.final_mse = final_loss * unit2;
    ae.record.seed = previous.seed;
}

Autoencoder train_autoencoder(const MatrixXd& snapshots, const SpatialGrid& grid, const AutoencoderConfig& config) {
    SpatialGrid g = grid;
    if (g.axes.empty()) {
        // External data without a grid: treat the rows as a 1D chain.
        g.axes = {Axis{0.0, 1.0, static_cast<std::size_t>(snapshots.rows())}};
        g.components = 1;
    }
    if (g.dof_count() != static_cast<std::size_t>(snapshots.rows())) {
        throw ShapeError("train_autoencoder: grid has " + std::to_string(g.dof_count()) + " DOFs, snapshots have " +
                         std::to_string(snapshots.rows()) + " rows");
    }
    const std::size_t h = config.hidden_width == 0 ? g.node_count() : config.hidden_width;
    const std::size_t he = config.encoder_width == 0 ? h : config.encoder_width;
    Autoencoder ae = Autoencoder::initialize(build_mask(g, h), he, config.latent_dim, config.activation, config.seed);
    if (config.minmax_scaling) {
        const double lo = snapshots.minCoeff();
        const double hi = snapshots.maxCoeff();
        if (hi > lo) {
            ae.input_shift = lo;
            ae.input_scale = hi - lo;
        }
    }
    train_autoencoder(ae, snapshots, config);
    return ae;
}

Eigen::MatrixXd ae_encode(const Autoencoder& ae, const Eigen::MatrixXd& states) {
    check_input(states, ae.full_dim(), "ae_encode");
    const MatrixXd xs = scale_input(ae, states);
    const MatrixXd h1 = activate(ae.activation, (ae.enc_w1 * xs).colwise() + ae.enc_b1);
    return (ae.enc_w2 * h1).colwise() + ae.enc_b2;
}

Eigen::MatrixXd ae_decode(const Autoencoder& ae, const Eigen::MatrixXd& latent) {
    check_input(latent, ae.latent_dim(), "ae_decode");
    const MatrixXd h2 = activate(ae.activation, (ae.dec_w1 * latent).colwise() + ae.dec_b1);
    MatrixXd y = (ae.dec_w2 * h2).colwise() + ae.dec_b2;
    if (ae.input_shift != 0.0 || ae.input_scale != 1.0) y = (y.array() * ae.input_scale + ae.input_shift).matrix();
    return y;
}

double ae_mse(const Autoencoder& ae, const Eigen::MatrixXd& states) {
    const MatrixXd diff = ae_decode(ae, ae_encode(ae, states)) - states;
    return diff.size() == 0 ? 0.0 : diff.squaredNorm() / static_cast<double>(diff.size());
}

double ae_loss_gradient(const Autoencoder& ae, const Eigen::MatrixXd& states, Eigen::VectorXd& gradient) {
    check_input(states, ae.full_dim(), "ae_loss_gradient");
    Gradients g;
    const double loss = loss_and_gradient(ae, scale_input(ae, states), g);
    gradient.resize(static_cast<Index>(ae.parameter_count()));
    Index off = 0;
    for (const auto& b : gradient_blocks(g)) {
        for (double v : b) gradient(off++) = v;
    }
    return loss;
}

std::vector<double*> ae_parameters(Autoencoder& ae) {
    std::vector<double*> out;
    out.reserve(ae.parameter_count());
    for (auto& b : parameter_blocks(ae)) {
        for (double& v : b) out.push_back(&v);
    }
    return out;
}

void save(const Autoencoder& ae, const std::filesystem::path& path) {
    io::BinaryWriter w(path, kAeMagic, kAeVersion);
    const auto n = static_cast<std::uint64_t>(ae.enc_w1.cols());
    const auto he = static_cast<std::uint64_t>(ae.enc_w1.rows());
    const auto h = static_cast<std::uint64_t>(ae.dec_w1.rows());
    const auto ns = static_cast<std::uint64_t>(ae.enc_w2.rows());
    w.u64(n);
    w.u64(he);
    w.u64(h);
    w.u64(ns);
    w.u32(static_cast<std::uint32_t>(ae.activation));
    w.f64(ae.input_shift);
    w.f64(ae.input_scale);
    w.matrix(ae.enc_w1);
    w.matrix(ae.enc_b1);
    w.matrix(ae.enc_w2);
    w.matrix(ae.enc_b2);
    w.matrix(ae.dec_w1);
    w.matrix(ae.dec_b1);
    // Mask: one bit per (row, hidden unit), rows padded to whole bytes.
    const std::size_t row_bytes = (h + 7) / 8;
    std::vector<std::uint8_t> bits(row_bytes);
    for (Index i = 0; i < ae.dec_w2.outerSize(); ++i) {
        std::fill(bits.begin(), bits.end(), 0);
        for (SparseRowMatrix::InnerIterator it(ae.dec_w2, i); it; ++it) {
            const auto c = static_cast<std::size_t>(it.col());
            bits[c / 8] |= static_cast<std::uint8_t>(1u << (c % 8));
        }
        w.bytes(bits);
    }
    w.f64s(std::span<const double>(ae.dec_w2.valuePtr(), static_cast<std::size_t>(ae.dec_w2.nonZeros())));
    w.matrix(ae.dec_b2);
    w.u64(ae.record.epochs);
    w.f64(ae.record.initial_mse);
    w.f64(ae.record.final_mse);
    w.u64(ae.record.seed);
    w.finish();
}

Autoencoder load_autoencoder(const std::filesystem::path& path) {
    io::BinaryReader r(path, kAeMagic, kAeVersion);
    const auto n = r.dim("N_s", 8);
    const auto he = r.dim("encoder_width", 8);
    const auto h = r.dim("hidden_width", 1);
    const auto ns = r.dim("n_s", 8);
    if (n == 0 || he == 0 || h == 0 || ns == 0) throw FormatError("'" + path.string() + "': zero layer width");
    Autoencoder ae;
    const auto act = r.u32();
    if (act > 1) throw FormatError("'" + path.string() + "': unknown activation code");
    ae.activation = static_cast<Activation>(act);
    ae.input_shift = r.f64();
    ae.input_scale = r.f64();
    ae.enc_w1 = r.matrix(he, n);
    ae.enc_b1 = r.matrix(he, 1);
    ae.enc_w2 = r.matrix(ns, he);
    ae.enc_b2 = r.matrix(ns, 1);
    ae.dec_w1 = r.matrix(h, ns);
    ae.dec_b1 = r.matrix(h, 1);
    const std::size_t row_bytes = (h + 7) / 8;
    if (n > r.remaining() / row_bytes) throw FormatError("'" + path.string() + "': mask exceeds file size");
    std::vector<Eigen::Triplet<double>> trips;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto bits = r.bytes(row_bytes);
        for (std::uint64_t c = 0; c < h; ++c) {
            if (bits[c / 8] & (1u << (c % 8))) trips.emplace_back(static_cast<int>(i), static_cast<int>(c), 0.0);
        }
    }
    ae.dec_w2.resize(static_cast<Index>(n), static_cast<Index>(h));
    ae.dec_w2.setFromTriplets(trips.begin(), trips.end());
    ae.dec_w2.makeCompressed();
    const auto values = r.f64s(trips.size());
    std::copy(values.begin(), values.end(), ae.dec_w2.valuePtr());
    ae.dec_b2 = r.matrix(n, 1);
    ae.record.epochs = r.u64();
    ae.record.initial_mse = r.f64();
    ae.record.final_mse = r.f64();
    ae.record.seed = r.u64();
    r.expect_end();
    return ae;
}

}  // namespace lasdi
