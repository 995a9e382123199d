#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace lasdi {

/// Candidate terms for the latent right-hand side.
///
/// Column order: constant, polynomial blocks of degree 1..poly_degree, then
/// sin(z_i), cos(z_i), exp(z_i). Within a degree block, monomials
/// z_i1 * ... * z_id with i1 <= ... <= id appear in lexicographic order when
/// cross terms are enabled, otherwise only the pure powers z_i^d.
struct LibrarySpec {
    int poly_degree = 1;
    bool cross_terms = true;
    bool include_sin = false;
    bool include_cos = false;
    bool include_exp = false;
    bool include_constant = true;
    std::size_t latent_dim = 1;

    bool operator==(const LibrarySpec&) const = default;
};

/// Closed-form column count. Throws Error for a degree outside 0..5.
std::size_t library_size(const LibrarySpec& spec);

/// Precomputed term layout for repeated evaluation.
class Library {
public:
    explicit Library(const LibrarySpec& spec);

    const LibrarySpec& spec() const { return spec_; }
    std::size_t size() const { return size_; }

    /// Theta for each row of `z` (rows are time instants, columns latent coordinates).
    Eigen::MatrixXd evaluate(const Eigen::MatrixXd& z) const;
    /// Theta for a single state, written into `out` (length size()).
    void evaluate(const Eigen::Ref<const Eigen::VectorXd>& z, Eigen::Ref<Eigen::VectorXd> out) const;

    /// Human-readable term labels using z1..zn.
    std::vector<std::string> term_names() const;

private:
    LibrarySpec spec_;
    std::size_t size_ = 0;
    std::vector<std::vector<int>> monomials_;  // factor indices per polynomial term
};

/// Convenience wrapper around Library::evaluate. Throws ShapeError when the
/// column count of `z` differs from spec.latent_dim.
Eigen::MatrixXd build_library(const Eigen::MatrixXd& z, const LibrarySpec& spec);

}  // namespace lasdi
