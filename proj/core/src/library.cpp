#include "lasdi/library.hpp"

#include "lasdi/error.hpp"

#include <cmath>

namespace lasdi {

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void check_degree(const LibrarySpec& spec) {
    if (spec.poly_degree < 0 || spec.poly_degree > 5) {
        throw Error("library polynomial degree must be in 0..5, got " + std::to_string(spec.poly_degree));
    }
    if (spec.latent_dim == 0) throw Error("library latent dimension must be positive");
}

// Nondecreasing index tuples of length d over 0..n-1, lexicographic.
void multisets(std::size_t n, int d, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == d) {
        out.push_back(current);
        return;
    }
    const int start = current.empty() ? 0 : current.back();
    for (int i = start; i < static_cast<int>(n); ++i) {
        current.push_back(i);
        multisets(n, d, current, out);
        current.pop_back();
    }
}

}  // namespace

std::size_t library_size(const LibrarySpec& spec) {
    check_degree(spec);
    const std::size_t n = spec.latent_dim;
    std::size_t count = spec.include_constant ? 1 : 0;
    for (int d = 1; d <= spec.poly_degree; ++d) {
        count += spec.cross_terms ? binomial(n + static_cast<std::size_t>(d) - 1, static_cast<std::size_t>(d)) : n;
    }
    if (spec.include_sin) count += n;
    if (spec.include_cos) count += n;
    if (spec.include_exp) count += n;
    return count;
}

Library::Library(const LibrarySpec& spec) : spec_(spec), size_(library_size(spec)) {
    const std::size_t n = spec.latent_dim;
    for (int d = 1; d <= spec.poly_degree; ++d) {
        if (spec.cross_terms) {
            std::vector<int> current;
            multisets(n, d, current, monomials_);
        } else {
            for (std::size_t i = 0; i < n; ++i) monomials_.emplace_back(static_cast<std::size_t>(d), static_cast<int>(i));
        }
    }
}

void Library::evaluate(const Eigen::Ref<const Eigen::VectorXd>& z, Eigen::Ref<Eigen::VectorXd> out) const {
    Eigen::Index c = 0;
    if (spec_.include_constant) out(c++) = 1.0;
    for (const auto& m : monomials_) {
        double v = 1.0;
        for (int i : m) v *= z(i);
        out(c++) = v;
    }
    const auto n = static_cast<Eigen::Index>(spec_.latent_dim);
    if (spec_.include_sin) {
        for (Eigen::Index i = 0; i < n; ++i) out(c++) = std::sin(z(i));
    }
    if (spec_.include_cos) {
        for (Eigen::Index i = 0; i < n; ++i) out(c++) = std::cos(z(i));
    }
    if (spec_.include_exp) {
        for (Eigen::Index i = 0; i < n; ++i) out(c++) = std::exp(z(i));
    }
}

Eigen::MatrixXd Library::evaluate(const Eigen::MatrixXd& z) const {
    if (static_cast<std::size_t>(z.cols()) != spec_.latent_dim) {
        throw ShapeError("library expects " + std::to_string(spec_.latent_dim) + " latent coordinates, data has " +
                         std::to_string(z.cols()));
    }
    const Eigen::Index rows = z.rows();
    const auto n = static_cast<Eigen::Index>(spec_.latent_dim);
    Eigen::MatrixXd theta(rows, static_cast<Eigen::Index>(size_));
    Eigen::Index c = 0;
    if (spec_.include_constant) theta.col(c++).setOnes();
    for (const auto& m : monomials_) {
        auto col = theta.col(c++);
        col.setOnes();
        for (int i : m) col.array() *= z.col(i).array();
    }
    if (spec_.include_sin) {
        for (Eigen::Index i = 0; i < n; ++i) theta.col(c++) = z.col(i).array().sin().matrix();
    }
    if (spec_.include_cos) {
        for (Eigen::Index i = 0; i < n; ++i) theta.col(c++) = z.col(i).array().cos().matrix();
    }
    if (spec_.include_exp) {
        for (Eigen::Index i = 0; i < n; ++i) theta.col(c++) = z.col(i).array().exp().matrix();
    }
    return theta;
}

std::vector<std::string> Library::term_names() const {
    std::vector<std::string> names;
    names.reserve(size_);
    if (spec_.include_constant) names.emplace_back("1");
    for (const auto& m : monomials_) {
        std::string s;
        std::size_t k = 0;
        while (k < m.size()) {
            std::size_t run = 1;
            while (k + run < m.size() && m[k + run] == m[k]) ++run;
            if (!s.empty()) s += '*';
            s += 'z' + std::to_string(m[k] + 1);
            if (run > 1) s += '^' + std::to_string(run);
            k += run;
        }
        names.push_back(std::move(s));
    }
    const std::size_t n = spec_.latent_dim;
    if (spec_.include_sin) {
        for (std::size_t i = 0; i < n; ++i) names.push_back("sin(z" + std::to_string(i + 1) + ")");
    }
    if (spec_.include_cos) {
        for (std::size_t i = 0; i < n; ++i) names.push_back("cos(z" + std::to_string(i + 1) + ")");
    }
    if (spec_.include_exp) {
        for (std::size_t i = 0; i < n; ++i) names.push_back("exp(z" + std::to_string(i + 1) + ")");
    }
    return names;
}

Eigen::MatrixXd build_library(const Eigen::MatrixXd& z, const LibrarySpec& spec) { return Library(spec).evaluate(z); }

}  // namespace lasdi
