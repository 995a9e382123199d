#pragma once

#include "lasdi/fom.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace lasdi {

/// Multiquadric radial basis function psi(d) = sqrt(d^2 / eps^2 + 1).
double multiquadric(double d, double eps);

/// Multiquadric interpolant augmented with a constant term, so constant data
/// are reproduced exactly. One collocation matrix is shared by all value columns.
class RbfInterpolant {
public:
    /// `values` has one row per center. eps defaults to the mean pairwise
    /// center distance; on a singular system eps is scaled by 1.01 up to five
    /// times before SingularError is thrown. Requires >= 2 distinct centers.
    RbfInterpolant(std::vector<ParameterPoint> centers, const Eigen::MatrixXd& values);

    Eigen::VectorXd evaluate(const ParameterPoint& query) const;

    double epsilon() const { return eps_; }
    const Eigen::MatrixXd& weights() const { return weights_; }  ///< rows: centers then the constant
    /// Max abs residual of the collocation solve.
    double residual() const { return residual_; }

private:
    std::vector<ParameterPoint> centers_;
    Eigen::MatrixXd weights_;
    double eps_ = 1.0;
    double residual_ = 0.0;
};

/// Mean Euclidean distance over all center pairs.
double mean_pairwise_distance(const std::vector<ParameterPoint>& centers);

/// Bilinear interpolation from the four corners of an axis-aligned rectangle in
/// a 2D parameter space. Corners may be given in any order; each corner value
/// gets weight 1 at its own corner. Throws GridError for non-rectangular
/// corners and ExtrapolationError when the query lies outside.
Eigen::MatrixXd interpolate_bilinear(const ParameterPoint& query, const std::vector<ParameterPoint>& corners,
                                     const std::vector<Eigen::MatrixXd>& values);

/// Sorted axis values of a full tensor grid in 2D.
struct UniformGrid2 {
    std::vector<double> x;
    std::vector<double> y;
};

/// Detects a complete 2D tensor grid whose axis values are uniformly spaced
/// (within 1e-9 relative). Returns nothing otherwise.
std::optional<UniformGrid2> detect_uniform_grid(const std::vector<ParameterPoint>& points);

}  // namespace lasdi
