#include "lasdi/ensemble.hpp"

#include "binary_io.hpp"
#include "lasdi/error.hpp"
#include "lasdi/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lasdi {

namespace {

constexpr io::Magic kDimMagic{'L', 'A', 'S', 'D', 'I', 'D', 'I', 'M'};
constexpr std::uint32_t kDimVersion = 1;

Eigen::RowVectorXd flatten(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::RowVectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

std::string format_coefficient(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::size_t locate_cell(const std::vector<double>& axis, double q) {
    const double lo = axis.front(), hi = axis.back();
    const double tol = 1e-12 * (hi - lo);
    if (q < lo - tol || q > hi + tol) {
        throw ExtrapolationError("bilinear query " + format_coefficient(q) + " lies outside the training range [" +
                                 format_coefficient(lo) + ", " + format_coefficient(hi) + "]");
    }
    const auto it = std::upper_bound(axis.begin(), axis.end(), q);
    std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
    return std::min(i, axis.size() - 2);
}

}  // namespace

std::string_view to_string(DiKind k) {
    switch (k) {
        case DiKind::global: return "global";
        case DiKind::local: return "local";
        case DiKind::interpolated: return "interpolated";
    }
    return "?";
}

std::string_view to_string(InterpMethod m) { return m == InterpMethod::rbf ? "rbf" : "bilinear"; }

DiKind parse_di_kind(std::string_view name) {
    if (name == "global") return DiKind::global;
    if (name == "local") return DiKind::local;
    if (name == "interpolated") return DiKind::interpolated;
    throw Error("unknown DI strategy '" + std::string(name) + "' (expected global, local or interpolated)");
}

InterpMethod parse_interp_method(std::string_view name) {
    if (name == "rbf") return InterpMethod::rbf;
    if (name == "bilinear") return InterpMethod::bilinear;
    throw Error("unknown interpolation method '" + std::string(name) + "' (expected rbf or bilinear)");
}

DiEnsemble::DiEnsemble(DiEnsemble&& other) noexcept { *this = std::move(other); }

DiEnsemble& DiEnsemble::operator=(DiEnsemble&& other) noexcept {
    if (this == &other) return *this;
    std::scoped_lock lock(cache_mutex_, other.cache_mutex_);
    strategy_ = other.strategy_;
    spec_ = other.spec_;
    scale_ = other.scale_;
    dt_ = other.dt_;
    training_ = std::move(other.training_);
    global_ = std::move(other.global_);
    per_point_ = std::move(other.per_point_);
    blocks_ = std::move(other.blocks_);
    grid_ = std::move(other.grid_);
    cache_ = std::move(other.cache_);
    return *this;
}

std::size_t DiEnsemble::effective_n_di() const {
    return strategy_.n_di == 0 ? training_.size() : strategy_.n_di;
}

DiEnsemble DiEnsemble::fit(const LatentSnapshotMatrix& latent, const LibrarySpec& spec, double dt,
                           const DiStrategy& strategy, bool rescale) {
    if (latent.n_param() == 0) throw InsufficientDataError("DI fit: no training blocks");
    DiEnsemble e;
    e.strategy_ = strategy;
    e.spec_ = spec;
    e.dt_ = dt;
    e.training_ = latent.params();
    e.scale_ = rescale ? rescale_factor(latent.data()) : 1.0;
    const std::size_t n_mu = latent.n_param();
    if (strategy.n_di > n_mu) {
        throw Error("DI strategy: n_DI = " + std::to_string(strategy.n_di) + " exceeds the " + std::to_string(n_mu) +
                    " training points");
    }
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(n_mu);
    for (std::size_t k = 0; k < n_mu; ++k) blocks.emplace_back(latent.block(k) / e.scale_);

    switch (strategy.kind) {
        case DiKind::global:
            e.global_ = std::make_shared<const CoefficientMatrix>(
                CoefficientMatrix{fit_blocks(blocks, spec, dt), spec, e.scale_});
            break;
        case DiKind::local:
            e.blocks_ = std::move(blocks);
            break;
        case DiKind::interpolated:
            if (strategy.method == InterpMethod::bilinear) {
                e.grid_ = detect_uniform_grid(e.training_);
                if (!e.grid_) {
                    throw GridError("bilinear interpolation requires the training parameters to form a uniform "
                                    "rectangular grid in a 2D parameter space");
                }
            } else if (e.effective_n_di() < 2) {
                throw Error("RBF interpolation needs n_DI >= 2");
            }
            for (const auto& b : blocks) e.per_point_.push_back(fit_blocks({b}, spec, dt));
            break;
    }
    return e;
}

std::shared_ptr<const CoefficientMatrix> DiEnsemble::coefficients(const ParameterPoint& query) const {
    switch (strategy_.kind) {
        case DiKind::global:
            return global_;
        case DiKind::local: {
            auto idx = nearest_training(query, training_, effective_n_di());
            std::sort(idx.begin(), idx.end());
            {
                std::lock_guard lock(cache_mutex_);
                if (auto it = cache_.find(idx); it != cache_.end()) return it->second;
            }
            std::vector<Eigen::MatrixXd> region;
            region.reserve(idx.size());
            for (auto k : idx) region.push_back(blocks_[k]);
            auto fitted = std::make_shared<const CoefficientMatrix>(
                CoefficientMatrix{fit_blocks(region, spec_, dt_), spec_, scale_});
            std::lock_guard lock(cache_mutex_);
            return cache_.try_emplace(std::move(idx), std::move(fitted)).first->second;
        }
        case DiKind::interpolated: {
            const Eigen::Index rows = per_point_.front().rows();
            const Eigen::Index cols = per_point_.front().cols();
            if (strategy_.method == InterpMethod::bilinear) {
                if (query.size() != 2) throw ShapeError("bilinear query must be 2D");
                const auto& g = *grid_;
                const std::size_t ix = locate_cell(g.x, query[0]);
                const std::size_t iy = locate_cell(g.y, query[1]);
                std::vector<ParameterPoint> corners;
                std::vector<Eigen::MatrixXd> values;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const ParameterPoint c{{g.x[ix + dx], g.y[iy + dy]}};
                        const auto k = nearest_training(c, training_, 1).front();
                        corners.push_back(training_[k]);
                        values.push_back(per_point_[k]);
                    }
                }
                return std::make_shared<const CoefficientMatrix>(
                    CoefficientMatrix{interpolate_bilinear(query, corners, values), spec_, scale_});
            }
            auto idx = nearest_training(query, training_, effective_n_di());
            std::sort(idx.begin(), idx.end());
            std::vector<ParameterPoint> centers;
            Eigen::MatrixXd values(static_cast<Eigen::Index>(idx.size()), rows * cols);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                centers.push_back(training_[idx[i]]);
                values.row(static_cast<Eigen::Index>(i)) = flatten(per_point_[idx[i]]);
            }
            const RbfInterpolant rbf(std::move(centers), values);
            return std::make_shared<const CoefficientMatrix>(
                CoefficientMatrix{unflatten(rbf.evaluate(query), rows, cols), spec_, scale_});
        }
    }
    throw Error("unknown DI strategy");
}

std::size_t DiEnsemble::cached_regions() const {
    std::lock_guard lock(cache_mutex_);
    return cache_.size();
}

std::string format_equations(const CoefficientMatrix& c) {
    const auto names = Library(c.spec).term_names();
    std::ostringstream out;
    for (Eigen::Index j = 0; j < c.xi.cols(); ++j) {
        out << "dz" << j + 1 << "/dt =";
        bool first = true;
        for (Eigen::Index i = 0; i < c.xi.rows(); ++i) {
            const double v = c.xi(i, j);
            if (v == 0.0) continue;
            const std::string mag = format_coefficient(std::abs(v));
            if (first) out << (v < 0 ? " -" : " ");
            else out << (v < 0 ? " - " : " + ");
            first = false;
            const auto& term = names[static_cast<std::size_t>(i)];
            if (term == "1") out << mag;
            else out << mag << '*' << term;
        }
        if (first) out << " 0";
        out << '\n';
    }
    return out.str();
}

std::string DiEnsemble::dump() const {
    std::ostringstream out;
    out << "strategy: " << to_string(strategy_.kind);
    if (strategy_.kind == DiKind::local) out << " (n_DI = " << effective_n_di() << ")";
    if (strategy_.kind == DiKind::interpolated) {
        out << " (" << to_string(strategy_.method);
        if (strategy_.method == InterpMethod::rbf) out << ", n_DI = " << effective_n_di();
        out << ")";
    }
    out << "\nlibrary: degree " << spec_.poly_degree << (spec_.cross_terms ? " with" : " without")
        << " cross terms" << (spec_.include_constant ? ", constant" : "") << (spec_.include_sin ? ", sin" : "")
        << (spec_.include_cos ? ", cos" : "") << (spec_.include_exp ? ", exp" : "") << "; "
        << library_size(spec_) << " terms, latent dimension " << spec_.latent_dim << '\n';
    if (scale_ != 1.0) out << "scale: " << format_coefficient(scale_) << " (equations act on z / scale)\n";
    out << "training points: " << training_.size() << '\n';

    auto point_text = [](const ParameterPoint& p) {
        std::string s = "(";
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) s += ", ";
            s += format_coefficient(p[i]);
        }
        return s + ")";
    };

    switch (strategy_.kind) {
        case DiKind::global:
            out << format_equations(*global_);
            break;
        case DiKind::local:
            if (effective_n_di() == training_.size()) {
                out << "n_DI equals the number of training points: equivalent to global DI\n";
                out << format_equations(*coefficients(training_.front()));
            } else {
                std::lock_guard lock(cache_mutex_);
                out << "cached regions: " << cache_.size() << '\n';
                for (const auto& [idx, c] : cache_) {
                    out << "region {";
                    for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? ", " : "") << idx[i];
                    out << "}\n" << format_equations(*c);
                }
            }
            break;
        case DiKind::interpolated:
            for (std::size_t k = 0; k < training_.size(); ++k) {
                out << "training point " << k << ' ' << point_text(training_[k]) << '\n';
                out << format_equations(CoefficientMatrix{per_point_[k], spec_, scale_});
            }
            break;
    }
    return out.str();
}

void DiEnsemble::save(const std::filesystem::path& path) const {
    io::BinaryWriter w(path, kDimMagic, kDimVersion);
    w.u32(static_cast<std::uint32_t>(strategy_.kind));
    w.u64(strategy_.n_di);
    w.u32(static_cast<std::uint32_t>(strategy_.method));
    w.u32(static_cast<std::uint32_t>(spec_.poly_degree));
    w.u8(static_cast<std::uint8_t>((spec_.cross_terms ? 1 : 0) | (spec_.include_sin ? 2 : 0) |
                                   (spec_.include_cos ? 4 : 0) | (spec_.include_exp ? 8 : 0) |
                                   (spec_.include_constant ? 16 : 0)));
    w.u64(spec_.latent_dim);
    w.f64(scale_);
    w.f64(dt_);
    const std::size_t pdim = training_.empty() ? 0 : training_.front().size();
    w.u64(training_.size());
    w.u64(pdim);
    for (const auto& p : training_) w.f64s(p.values);
    switch (strategy_.kind) {
        case DiKind::global:
            w.matrix(global_->xi);
            break;
        case DiKind::interpolated:
            for (const auto& m : per_point_) w.matrix(m);
            break;
        case DiKind::local: {
            const std::size_t cols = blocks_.empty() ? 0 : static_cast<std::size_t>(blocks_.front().cols());
            w.u64(cols);
            for (const auto& b : blocks_) w.matrix(b);
            std::lock_guard lock(cache_mutex_);
            w.u64(cache_.size());
            for (const auto& [idx, c] : cache_) {
                w.u64(idx.size());
                for (auto k : idx) w.u64(k);
                w.matrix(c->xi);
            }
            break;
        }
    }
    w.finish();
}

DiEnsemble DiEnsemble::load(const std::filesystem::path& path) {
    io::BinaryReader r(path, kDimMagic, kDimVersion);
    DiEnsemble e;
    const auto kind = r.u32();
    if (kind > 2) throw FormatError("'" + path.string() + "': unknown DI strategy code");
    e.strategy_.kind = static_cast<DiKind>(kind);
    e.strategy_.n_di = r.u64();
    const auto method = r.u32();
    if (method > 1) throw FormatError("'" + path.string() + "': unknown interpolation method code");
    e.strategy_.method = static_cast<InterpMethod>(method);
    e.spec_.poly_degree = static_cast<int>(r.u32());
    const auto flags = r.u8();
    e.spec_.cross_terms = flags & 1;
    e.spec_.include_sin = flags & 2;
    e.spec_.include_cos = flags & 4;
    e.spec_.include_exp = flags & 8;
    e.spec_.include_constant = flags & 16;
    e.spec_.latent_dim = r.u64();
    if (e.spec_.poly_degree > 5 || e.spec_.latent_dim == 0 || e.spec_.latent_dim > (1u << 20)) {
        throw FormatError("'" + path.string() + "': invalid library description");
    }
    e.scale_ = r.f64();
    e.dt_ = r.f64();
    const auto n_train = r.dim("n_train", 8);
    const auto pdim = r.dim("param_dim", 0);
    if (n_train != 0 && pdim > r.remaining() / 8 / n_train) throw FormatError("'" + path.string() + "': truncated");
    for (std::uint64_t k = 0; k < n_train; ++k) e.training_.push_back(ParameterPoint{r.f64s(pdim)});
    const std::size_t n_l = library_size(e.spec_);
    const std::size_t n_s = e.spec_.latent_dim;
    switch (e.strategy_.kind) {
        case DiKind::global:
            e.global_ = std::make_shared<const CoefficientMatrix>(CoefficientMatrix{r.matrix(n_l, n_s), e.spec_, e.scale_});
            break;
        case DiKind::interpolated:
            for (std::uint64_t k = 0; k < n_train; ++k) e.per_point_.push_back(r.matrix(n_l, n_s));
            if (e.strategy_.method == InterpMethod::bilinear) {
                e.grid_ = detect_uniform_grid(e.training_);
                if (!e.grid_) throw FormatError("'" + path.string() + "': bilinear model without a training grid");
            }
            break;
        case DiKind::local: {
            const auto cols = r.dim("block_cols", 0);
            for (std::uint64_t k = 0; k < n_train; ++k) e.blocks_.push_back(r.matrix(n_s, cols));
            const auto n_cached = r.dim("regions", 8);
            for (std::uint64_t c = 0; c < n_cached; ++c) {
                const auto len = r.dim("region size", 8);
                std::vector<std::size_t> idx(len);
                for (auto& k : idx) {
                    k = r.u64();
                    if (k >= n_train) throw FormatError("'" + path.string() + "': region index out of range");
                }
                e.cache_.emplace(std::move(idx), std::make_shared<const CoefficientMatrix>(
                                                     CoefficientMatrix{r.matrix(n_l, n_s), e.spec_, e.scale_}));
            }
            break;
        }
    }
    r.expect_end();
    return e;
}

}  // namespace lasdi
