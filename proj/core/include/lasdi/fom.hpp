#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lasdi {

enum class ProblemKind { burgers1d, burgers2d, heat2d, advect2d };

std::string_view to_string(ProblemKind kind);
/// Throws Error for an unknown name.
ProblemKind parse_problem_kind(std::string_view name);

/// One uniformly spaced axis, nodes include both end points.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t nodes = 2;

    double spacing() const { return (hi - lo) / static_cast<double>(nodes - 1); }
    double coordinate(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }
    bool operator==(const Axis&) const = default;
};

/// Tensor-product node grid in one or two dimensions.
///
/// Nodes are numbered with the first axis fastest: node = iy * nx + ix.
/// Vector-valued fields store one block per component, each block ordered
/// like the nodes, so dof = component * node_count() + node.
struct SpatialGrid {
    std::vector<Axis> axes;
    std::size_t components = 1;

    std::size_t dimension() const { return axes.size(); }
    std::size_t node_count() const;
    std::size_t dof_count() const { return node_count() * components; }
    /// Physical coordinates of a node.
    std::vector<double> node_coordinates(std::size_t node) const;
    /// True if the node lies on the domain boundary.
    bool on_boundary(std::size_t node) const;
    bool operator==(const SpatialGrid&) const = default;
};

struct TimeGrid {
    double dt = 1e-3;
    std::size_t n_steps = 1000;

    double t_final() const { return dt * static_cast<double>(n_steps); }
    double time(std::size_t n) const { return dt * static_cast<double>(n); }
    bool operator==(const TimeGrid&) const = default;
};

struct ParameterPoint {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    bool operator==(const ParameterPoint&) const = default;
};

double distance(const ParameterPoint& a, const ParameterPoint& b);

/// Axis-aligned box of admissible parameter values.
struct ParameterDomain {
    std::vector<std::string> names;
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dimension() const { return names.size(); }
    bool contains(const ParameterPoint& p) const;
};

struct NewtonOptions {
    double tolerance = 1e-10;  ///< infinity norm of the step residual
    int max_iterations = 20;
};

/// A parameterized PDE together with its discretization.
struct PdeProblem {
    ProblemKind kind = ProblemKind::burgers1d;
    SpatialGrid grid;
    TimeGrid time;
    ParameterDomain domain;
    double viscosity = 0.0;  ///< 2D Burgers diffusion coefficient
    NewtonOptions newton;
    double linear_tolerance = 1e-12;  ///< relative residual for iterative linear solves

    /// Default discretization and parameter domain for `kind`.
    static PdeProblem make(ProblemKind kind);
};

/// Full-state trajectory; column n holds u(t^n).
struct StateTrajectory {
    Eigen::MatrixXd states;
    ParameterPoint parameter;

    std::size_t n_steps() const { return states.cols() == 0 ? 0 : static_cast<std::size_t>(states.cols()) - 1; }
};

enum class DomainCheck { strict, allow_outside };

/// Analytic initial condition at an arbitrary point, no boundary treatment.
double initial_condition_at(const PdeProblem& problem, const ParameterPoint& param,
                            std::span<const double> x, std::size_t component = 0);

/// Initial state evaluated on the nodes, Dirichlet nodes set to zero.
/// Throws DomainError if `param` lies outside the domain and `check` is strict.
Eigen::VectorXd initial_condition(const PdeProblem& problem, const ParameterPoint& param,
                                  DomainCheck check = DomainCheck::strict);

/// Solver counters, filled when requested.
struct FomStats {
    std::size_t newton_iterations = 0;
    std::size_t linear_iterations = 0;
    double max_accepted_residual = 0.0;  ///< largest Newton residual at an accepted step
};

/// Integrates the discretized PDE from an explicit initial state.
///
/// Burgers problems use backward Euler with Newton iterations on the nonlinear
/// residual, heat conduction uses backward Euler with the conductivity frozen
/// at the previous step, radial advection uses classical RK4.
/// Throws SolverDivergenceError or InstabilityError carrying the step index.
StateTrajectory integrate_fom(const PdeProblem& problem, const Eigen::VectorXd& u0,
                              const ParameterPoint& param = {}, FomStats* stats = nullptr);

/// initial_condition() followed by integrate_fom().
StateTrajectory solve_fom(const PdeProblem& problem, const ParameterPoint& param,
                          DomainCheck check = DomainCheck::strict, FomStats* stats = nullptr);

/// Wall-clock seconds of one complete solve_fom call.
double measure_fom_walltime(const PdeProblem& problem, const ParameterPoint& param,
                            DomainCheck check = DomainCheck::strict);

}  // namespace lasdi
