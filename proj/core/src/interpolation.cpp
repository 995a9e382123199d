#include "lasdi/interpolation.hpp"

#include "lasdi/error.hpp"
#include "lasdi/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace lasdi {

namespace {

constexpr int kEpsRetries = 5;

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::vector<double> distinct_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || !close(out.back(), x)) out.push_back(x);
    }
    return out;
}

bool uniform(const std::vector<double>& v) {
    if (v.size() < 2) return false;
    const double h = v[1] - v[0];
    for (std::size_t i = 2; i < v.size(); ++i) {
        if (std::abs((v[i] - v[i - 1]) - h) > 1e-9 * std::abs(h)) return false;
    }
    return true;
}

}  // namespace

double multiquadric(double d, double eps) { return std::sqrt(d * d / (eps * eps) + 1.0); }

double mean_pairwise_distance(const std::vector<ParameterPoint>& centers) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            sum += distance(centers[i], centers[j]);
            ++pairs;
        }
    }
    return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

RbfInterpolant::RbfInterpolant(std::vector<ParameterPoint> centers, const Eigen::MatrixXd& values)
    : centers_(std::move(centers)) {
    const auto n = static_cast<Eigen::Index>(centers_.size());
    if (n < 2) throw Error("RBF interpolation needs at least 2 centers, got " + std::to_string(n));
    if (values.rows() != n) {
        throw ShapeError("RBF interpolation: " + std::to_string(values.rows()) + " value rows for " +
                         std::to_string(n) + " centers");
    }
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (distance(centers_[i], centers_[j]) == 0.0) {
                throw DuplicateError("RBF interpolation: centers " + std::to_string(j) + " and " + std::to_string(i) +
                                     " coincide");
            }
        }
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 1, values.cols());
    rhs.topRows(n) = values;
    const double data_scale = std::max(1.0, values.size() ? values.cwiseAbs().maxCoeff() : 0.0);

    eps_ = mean_pairwise_distance(centers_);
    for (int attempt = 0; attempt <= kEpsRetries; ++attempt) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                a(i, j) = multiquadric(distance(centers_[static_cast<std::size_t>(i)], centers_[static_cast<std::size_t>(j)]),
                                       eps_);
            }
            a(i, n) = 1.0;
            a(n, i) = 1.0;
        }
        auto ls = linalg::least_squares(a, rhs);
        if (ls.rank == n + 1) {
            residual_ = values.size() ? (a * ls.solution - rhs).cwiseAbs().maxCoeff() : 0.0;
            if (residual_ <= 1e-8 * data_scale) {
                weights_ = std::move(ls.solution);
                return;
            }
        }
        eps_ *= 1.01;
    }
    throw SingularError("RBF collocation matrix is singular after " + std::to_string(kEpsRetries) +
                        " shape-parameter perturbations");
}

Eigen::VectorXd RbfInterpolant::evaluate(const ParameterPoint& query) const {
    const auto n = static_cast<Eigen::Index>(centers_.size());
    Eigen::VectorXd psi(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        psi(i) = multiquadric(distance(query, centers_[static_cast<std::size_t>(i)]), eps_);
    }
    psi(n) = 1.0;
    return weights_.transpose() * psi;
}

Eigen::MatrixXd interpolate_bilinear(const ParameterPoint& query, const std::vector<ParameterPoint>& corners,
                                     const std::vector<Eigen::MatrixXd>& values) {
    if (corners.size() != 4 || values.size() != 4) throw GridError("bilinear interpolation needs exactly 4 corners");
    if (query.size() != 2) throw GridError("bilinear interpolation needs a 2D parameter space");
    std::vector<double> xs, ys;
    for (const auto& c : corners) {
        if (c.size() != 2) throw GridError("bilinear interpolation needs a 2D parameter space");
        xs.push_back(c[0]);
        ys.push_back(c[1]);
    }
    const auto ux = distinct_sorted(xs);
    const auto uy = distinct_sorted(ys);
    if (ux.size() != 2 || uy.size() != 2) throw GridError("bilinear corners do not form an axis-aligned rectangle");
    bool seen[2][2] = {{false, false}, {false, false}};
    for (const auto& c : corners) {
        const int i = close(c[0], ux[0]) ? 0 : 1;
        const int j = close(c[1], uy[0]) ? 0 : 1;
        if (seen[i][j]) throw GridError("bilinear corners do not form an axis-aligned rectangle");
        seen[i][j] = true;
    }
    const double x0 = ux[0], x1 = ux[1], y0 = uy[0], y1 = uy[1];
    const double tol_x = 1e-12 * (x1 - x0), tol_y = 1e-12 * (y1 - y0);
    if (query[0] < x0 - tol_x || query[0] > x1 + tol_x || query[1] < y0 - tol_y || query[1] > y1 + tol_y) {
        throw ExtrapolationError("bilinear query lies outside the corner rectangle");
    }
    const double tx = std::clamp((query[0] - x0) / (x1 - x0), 0.0, 1.0);
    const double ty = std::clamp((query[1] - y0) / (y1 - y0), 0.0, 1.0);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(values[0].rows(), values[0].cols());
    for (std::size_t k = 0; k < 4; ++k) {
        if (values[k].rows() != out.rows() || values[k].cols() != out.cols()) {
            throw ShapeError("bilinear corner values have differing shapes");
        }
        const double wx = close(corners[k][0], x0) ? 1.0 - tx : tx;
        const double wy = close(corners[k][1], y0) ? 1.0 - ty : ty;
        const double w = wx * wy;
        if (w != 0.0) out += w * values[k];
    }
    return out;
}

std::optional<UniformGrid2> detect_uniform_grid(const std::vector<ParameterPoint>& points) {
    if (points.empty()) return std::nullopt;
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        if (p.size() != 2) return std::nullopt;
        xs.push_back(p[0]);
        ys.push_back(p[1]);
    }
    UniformGrid2 g{distinct_sorted(xs), distinct_sorted(ys)};
    if (!uniform(g.x) || !uniform(g.y)) return std::nullopt;
    if (g.x.size() * g.y.size() != points.size()) return std::nullopt;
    std::vector<char> seen(points.size(), 0);
    for (const auto& p : points) {
        const auto ix = static_cast<std::size_t>(
            std::find_if(g.x.begin(), g.x.end(), [&](double v) { return close(v, p[0]); }) - g.x.begin());
        const auto iy = static_cast<std::size_t>(
            std::find_if(g.y.begin(), g.y.end(), [&](double v) { return close(v, p[1]); }) - g.y.begin());
        auto& s = seen[iy * g.x.size() + ix];
        if (s) return std::nullopt;
        s = 1;
    }
    return g;
}

}  // namespace lasdi
