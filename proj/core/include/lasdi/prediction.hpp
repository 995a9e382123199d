#pragma once

#include "lasdi/compressor.hpp"
#include "lasdi/dopri.hpp"
#include "lasdi/ensemble.hpp"
#include "lasdi/fom.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace lasdi {

/// Compressed initial state divided by the ensemble scale.
Eigen::VectorXd latent_initial_condition(const Compressor& c, const Eigen::VectorXd& u0, double scale = 1.0);

/// Decodes latent columns given in scaled coordinates (multiplied by `scale` first).
Eigen::MatrixXd reconstruct(const Compressor& c, const Eigen::MatrixXd& latent, double scale = 1.0);

struct PredictedTrajectory {
    ParameterPoint parameter;
    Eigen::MatrixXd latent;  ///< unscaled latent states, one column per t^n
    Eigen::MatrixXd states;  ///< reconstructed full states
};

/// Online prediction: project the analytic initial state, integrate the
/// identified latent ODE on the problem's time grid, and decode.
PredictedTrajectory predict(const Compressor& c, const DiEnsemble& e, const PdeProblem& problem,
                            const ParameterPoint& param, const OdeSolverConfig& ode = {},
                            DomainCheck check = DomainCheck::strict);

/// ||pred_n - ref_n|| / ||ref_n|| for n = 1..N_t.
/// Throws ShapeError on differing shapes and DivisionError for a zero reference column.
std::vector<double> relative_errors(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference);
double max_relative_error(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference);

/// Smallest value over n of ||pred_n - ref_n|| - ||Phi Phi^T ref_n - ref_n||, n = 0..N_t.
/// Nonnegative (up to rounding) whenever every predicted column lies in span(Phi).
double projection_margin(const PodBasis& pod, const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference);

/// A compressor/ensemble pair evaluated in a sweep.
struct EvalModel {
    std::string name;
    const Compressor* compressor = nullptr;
    const DiEnsemble* ensemble = nullptr;
};

struct EvalOptions {
    OdeSolverConfig ode;
    std::size_t jobs = 1;
    bool timing = true;
    /// With jobs > 1, the number of points re-run in the serial timing pass.
    std::size_t timing_samples = 5;
    bool check_lower_bound = true;
    double lower_bound_slack = 1e-12;
};

/// Per-model outcome of a sweep. Failed points carry NaN.
struct ErrorReport {
    std::string model;
    std::vector<ParameterPoint> points;
    std::vector<double> errors;
    std::size_t failed = 0;

    /// Indices of the smallest and largest finite error, or npos when none.
    std::size_t argmin() const;
    std::size_t argmax() const;
    double min_error() const;
    double max_error() const;

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

struct SpeedupReport {
    std::string model;
    double mean_fom_seconds = 0.0;
    double mean_lasdi_seconds = 0.0;
    std::size_t samples = 0;

    double ratio() const { return mean_lasdi_seconds > 0.0 ? mean_fom_seconds / mean_lasdi_seconds : 0.0; }
};

struct LowerBoundReport {
    std::size_t trajectories = 0;
    std::size_t violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
};

struct Evaluation {
    std::vector<ErrorReport> errors;      ///< one per model
    std::vector<SpeedupReport> speedups;  ///< one per model, empty without timing
    std::vector<LowerBoundReport> lower_bounds;  ///< one per model, unused for autoencoders
    std::vector<std::string> failures;
};

/// Evaluates every model at every test point against on-the-fly FOM
/// references, which are shared by all models and not retained. Failures at a
/// point never abort the sweep: they become NaN entries, a failure log line
/// and a warning.
Evaluation evaluate_testset(const std::vector<EvalModel>& models, const PdeProblem& problem,
                            const std::vector<ParameterPoint>& test_points, const EvalOptions& options = {});

/// Heat-map CSV: header holds the first-axis values, each row starts with a
/// second-axis value followed by the errors on that row. One-dimensional
/// parameter sets produce a single row labelled "error".
void write_heatmap_csv(const ErrorReport& report, const std::vector<std::string>& axis_names,
                       const std::filesystem::path& path);

/// Long format: parameter columns then one error column per model.
void write_points_csv(const Evaluation& eval, const std::vector<std::string>& axis_names,
                      const std::filesystem::path& path);

/// One row per model with min/max error, their locations, timings and speedup.
void write_summary_csv(const Evaluation& eval, const std::filesystem::path& path);

}  // namespace lasdi
