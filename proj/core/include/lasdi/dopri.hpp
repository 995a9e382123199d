#pragma once

#include "lasdi/fom.hpp"
#include "lasdi/regression.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace lasdi {

struct OdeSolverConfig {
    double rtol = 1e-6;
    double atol = 1e-8;
    double initial_step = 0.0;  ///< 0 selects an automatic estimate
    double min_step = 0.0;      ///< 0 selects 1e-12 * max(1, t_final)
    double max_step = 0.0;      ///< 0 means unbounded
    double safety = 0.9;
    double min_factor = 0.2;
    double max_factor = 5.0;
    std::size_t max_steps = 1000000;

    /// Throws Error when a field is out of range.
    void validate() const;
};

struct DopriStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

using OdeRhs = std::function<void(const Eigen::VectorXd& z, Eigen::VectorXd& dz)>;

/// Dormand-Prince 5(4) with local extrapolation, sampled at every t^n of
/// `time` (column n of the result). Steps are truncated to land on each
/// instant. The local error is the RMS of the embedded difference scaled by
/// atol + rtol * max(|z_old|, |z_new|).
/// Throws StiffnessError when the step falls below min_step or max_steps is
/// exceeded, BlowUpError when the state becomes non-finite.
Eigen::MatrixXd integrate_dopri(const OdeRhs& rhs, const Eigen::VectorXd& z0, const TimeGrid& time,
                                const OdeSolverConfig& config = {}, DopriStats* stats = nullptr);

/// Integrates dw/dt = Xi^T theta(w) in the coefficient matrix's own coordinates.
Eigen::MatrixXd integrate_dopri(const CoefficientMatrix& c, const Eigen::VectorXd& w0, const TimeGrid& time,
                                const OdeSolverConfig& config = {}, DopriStats* stats = nullptr);

}  // namespace lasdi
