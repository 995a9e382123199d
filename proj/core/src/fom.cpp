#include "lasdi/fom.hpp"

#include "lasdi/error.hpp"
#include "lasdi/linalg.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lasdi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::burgers1d: return "burgers1d";
        case ProblemKind::burgers2d: return "burgers2d";
        case ProblemKind::heat2d: return "heat2d";
        case ProblemKind::advect2d: return "advect2d";
    }
    return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
    for (auto kind : {ProblemKind::burgers1d, ProblemKind::burgers2d, ProblemKind::heat2d,
                      ProblemKind::advect2d}) {
        if (to_string(kind) == name) return kind;
    }
    throw Error("unknown problem kind '" + std::string(name) + "'");
}

std::size_t SpatialGrid::node_count() const {
    std::size_t n = 1;
    for (const auto& axis : axes) n *= axis.nodes;
    return axes.empty() ? 0 : n;
}

std::vector<double> SpatialGrid::node_coordinates(std::size_t node) const {
    std::vector<double> x(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d) {
        x[d] = axes[d].coordinate(node % axes[d].nodes);
        node /= axes[d].nodes;
    }
    return x;
}

bool SpatialGrid::on_boundary(std::size_t node) const {
    for (const auto& axis : axes) {
        const std::size_t i = node % axis.nodes;
        if (i == 0 || i + 1 == axis.nodes) return true;
        node /= axis.nodes;
    }
    return false;
}

double distance(const ParameterPoint& a, const ParameterPoint& b) {
    if (a.size() != b.size()) throw ShapeError("distance: parameter dimensions differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

bool ParameterDomain::contains(const ParameterPoint& p) const {
    if (p.size() != dimension()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double slack = 1e-12 * std::max(1.0, std::abs(hi[i] - lo[i]));
        if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    }
    return true;
}

PdeProblem PdeProblem::make(ProblemKind kind) {
    PdeProblem p;
    p.kind = kind;
    switch (kind) {
        case ProblemKind::burgers1d:
            p.grid.axes = {Axis{-3.0, 3.0, 1001}};
            p.time = TimeGrid{1.0 / 1000.0, 1000};
            p.domain = ParameterDomain{{"a", "w"}, {0.7, 0.9}, {0.9, 1.1}};
            break;
        case ProblemKind::burgers2d:
            p.grid.axes = {Axis{-3.0, 3.0, 61}, Axis{-3.0, 3.0, 61}};
            p.grid.components = 2;
            p.time = TimeGrid{2.0 / 1500.0, 1500};
            p.domain = ParameterDomain{{"a", "w"}, {0.7, 0.9}, {0.9, 1.1}};
            p.viscosity = 1.0 / 10000.0;
            break;
        case ProblemKind::heat2d:
            p.grid.axes = {Axis{0.0, 1.0, 65}, Axis{0.0, 1.0, 65}};
            p.time = TimeGrid{0.01, 100};
            p.domain = ParameterDomain{{"omega", "a"}, {0.2, 1.8}, {5.0, 2.2}};
            break;
        case ProblemKind::advect2d:
            p.grid.axes = {Axis{-1.0, 1.0, 64}, Axis{-1.0, 1.0, 64}};
            p.time = TimeGrid{0.0025, 1200};
            p.domain = ParameterDomain{{"omega"}, {0.6}, {1.4}};
            break;
    }
    return p;
}

namespace {

bool has_dirichlet_boundary(ProblemKind kind) { return kind != ProblemKind::heat2d; }

void check_parameter(const PdeProblem& problem, const ParameterPoint& param, DomainCheck check) {
    if (param.size() != problem.domain.dimension()) {
        throw ShapeError(std::string(to_string(problem.kind)) + " expects " +
                         std::to_string(problem.domain.dimension()) + " parameter values, got " +
                         std::to_string(param.size()));
    }
    if (check == DomainCheck::strict && !problem.domain.contains(param)) {
        std::ostringstream os;
        os << "parameter (";
        for (std::size_t i = 0; i < param.size(); ++i) os << (i ? ", " : "") << param[i];
        os << ") lies outside the " << to_string(problem.kind) << " parameter domain";
        throw DomainError(os.str());
    }
}

void check_finite(const VectorXd& u, std::size_t step, ProblemKind kind) {
    if (!u.allFinite()) {
        throw InstabilityError(std::string(to_string(kind)) + ": non-finite state at step " +
                                   std::to_string(step),
                               step);
    }
}

// ---------------------------------------------------------------------------
// 1D Burgers, u_t = -u u_x, backward difference in space, backward Euler in time.

void burgers1d_steps(const PdeProblem& problem, MatrixXd& states, FomStats& stats) {
    const auto n = static_cast<std::size_t>(states.rows());
    const double dx = problem.grid.axes[0].spacing();
    const double dt = problem.time.dt;
    const double c = dt / dx;
    std::vector<double> lower(n, 0.0), diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
    VectorXd u(static_cast<Eigen::Index>(n));

    for (std::size_t step = 1; step <= problem.time.n_steps; ++step) {
        const auto u_old = states.col(static_cast<Eigen::Index>(step - 1));
        u = u_old;
        bool converged = false;
        for (int it = 0; it <= problem.newton.max_iterations; ++it) {
            double res_norm = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double r = u[i] - u_old[i] + c * u[i] * (u[i] - u[i - 1]);
                rhs[i] = -r;
                res_norm = std::max(res_norm, std::abs(r));
            }
            if (res_norm <= problem.newton.tolerance) {
                stats.max_accepted_residual = std::max(stats.max_accepted_residual, res_norm);
                converged = true;
                break;
            }
            if (it == problem.newton.max_iterations || !std::isfinite(res_norm)) break;
            ++stats.newton_iterations;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                diag[i] = 1.0 + c * (2.0 * u[i] - u[i - 1]);
                lower[i] = -c * u[i];
            }
            rhs[0] = 0.0;
            rhs[n - 1] = 0.0;
            linalg::solve_tridiagonal(lower, diag, upper, rhs);
            for (std::size_t i = 1; i + 1 < n; ++i) u[i] += rhs[i];
        }
        if (!converged) {
            check_finite(u, step, problem.kind);
            throw SolverDivergenceError("burgers1d: Newton did not converge at step " +
                                            std::to_string(step),
                                        step);
        }
        check_finite(u, step, problem.kind);
        states.col(static_cast<Eigen::Index>(step)) = u;
    }
}

// ---------------------------------------------------------------------------
// 2D Burgers, u_t = -u.grad(u) + nu lap(u). Backward differences for advection,
// central differences for diffusion, backward Euler with Newton; the Newton
// systems are solved with BiCGSTAB.

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

void burgers2d_steps(const PdeProblem& problem, MatrixXd& states, FomStats& stats) {
    const auto& ax = problem.grid.axes[0];
    const auto& ay = problem.grid.axes[1];
    const std::size_t nx = ax.nodes;
    const std::size_t ny = ay.nodes;
    const std::size_t nodes = nx * ny;
    const auto dofs = static_cast<Eigen::Index>(2 * nodes);
    const double dx = ax.spacing();
    const double dy = ay.spacing();
    const double dt = problem.time.dt;
    const double nu = problem.viscosity;
    const double cxx = nu / (dx * dx);
    const double cyy = nu / (dy * dy);

    std::vector<std::size_t> interior;
    for (std::size_t node = 0; node < nodes; ++node) {
        if (!problem.grid.on_boundary(node)) interior.push_back(node);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(interior.size() * 12 + 2 * nodes);
    SparseRowMatrix jac(dofs, dofs);
    Eigen::BiCGSTAB<SparseRowMatrix, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setTolerance(problem.linear_tolerance);
    solver.setMaxIterations(1000);

    VectorXd u(dofs), residual(dofs), delta(dofs);
    for (std::size_t step = 1; step <= problem.time.n_steps; ++step) {
        const auto u_old = states.col(static_cast<Eigen::Index>(step - 1));
        u = u_old;
        bool converged = false;
        for (int it = 0; it <= problem.newton.max_iterations; ++it) {
            residual.setZero();
            double res_norm = 0.0;
            for (std::size_t node : interior) {
                const auto off = static_cast<Eigen::Index>(nodes);
                const auto iu = static_cast<Eigen::Index>(node);
                const auto iv = iu + off;
                const auto w = iu - 1, e = iu + 1;
                const auto s = iu - static_cast<Eigen::Index>(nx), n = iu + static_cast<Eigen::Index>(nx);
                const double un = u[iu], vn = u[iv];
                const double lap_u = cxx * (u[e] - 2 * un + u[w]) + cyy * (u[n] - 2 * un + u[s]);
                const double lap_v = cxx * (u[e + off] - 2 * vn + u[w + off]) +
                                     cyy * (u[n + off] - 2 * vn + u[s + off]);
                const double adv_u = un * (un - u[w]) / dx + vn * (un - u[s]) / dy;
                const double adv_v = un * (vn - u[w + off]) / dx + vn * (vn - u[s + off]) / dy;
                residual[iu] = un - u_old[iu] + dt * (adv_u - lap_u);
                residual[iv] = vn - u_old[iv] + dt * (adv_v - lap_v);
                res_norm = std::max({res_norm, std::abs(residual[iu]), std::abs(residual[iv])});
            }
            if (res_norm <= problem.newton.tolerance) {
                stats.max_accepted_residual = std::max(stats.max_accepted_residual, res_norm);
                converged = true;
                break;
            }
            if (it == problem.newton.max_iterations || !std::isfinite(res_norm)) break;
            ++stats.newton_iterations;

            triplets.clear();
            for (std::size_t node = 0; node < nodes; ++node) {
                if (problem.grid.on_boundary(node)) {
                    const auto iu = static_cast<Eigen::Index>(node);
                    triplets.emplace_back(iu, iu, 1.0);
                    triplets.emplace_back(iu + static_cast<Eigen::Index>(nodes),
                                          iu + static_cast<Eigen::Index>(nodes), 1.0);
                }
            }
            for (std::size_t node : interior) {
                const auto iu = static_cast<Eigen::Index>(node);
                const auto off = static_cast<Eigen::Index>(nodes);
                const auto iv = iu + off;
                const auto w = iu - 1, e = iu + 1;
                const auto s = iu - static_cast<Eigen::Index>(nx), n = iu + static_cast<Eigen::Index>(nx);
                const double un = u[iu], vn = u[iv];
                const double diff_diag = 2.0 * (cxx + cyy);
                // u-equation row
                triplets.emplace_back(iu, iu, 1.0 + dt * ((2 * un - u[w]) / dx + vn / dy + diff_diag));
                triplets.emplace_back(iu, w, dt * (-un / dx - cxx));
                triplets.emplace_back(iu, e, -dt * cxx);
                triplets.emplace_back(iu, s, dt * (-vn / dy - cyy));
                triplets.emplace_back(iu, n, -dt * cyy);
                triplets.emplace_back(iu, iv, dt * (un - u[s]) / dy);
                // v-equation row
                triplets.emplace_back(iv, iv, 1.0 + dt * (un / dx + (2 * vn - u[s + off]) / dy + diff_diag));
                triplets.emplace_back(iv, w + off, dt * (-un / dx - cxx));
                triplets.emplace_back(iv, e + off, -dt * cxx);
                triplets.emplace_back(iv, s + off, dt * (-vn / dy - cyy));
                triplets.emplace_back(iv, n + off, -dt * cyy);
                triplets.emplace_back(iv, iu, dt * (vn - u[w + off]) / dx);
            }
            jac.setFromTriplets(triplets.begin(), triplets.end());
            solver.compute(jac);
            delta = solver.solve(-residual);
            stats.linear_iterations += static_cast<std::size_t>(solver.iterations());
            if (solver.info() != Eigen::Success) {
                throw SolverDivergenceError("burgers2d: linear solve failed at step " +
                                                std::to_string(step),
                                            step);
            }
            u += delta;
        }
        if (!converged) {
            check_finite(u, step, problem.kind);
            throw SolverDivergenceError("burgers2d: Newton did not converge at step " +
                                            std::to_string(step),
                                        step);
        }
        check_finite(u, step, problem.kind);
        states.col(static_cast<Eigen::Index>(step)) = u;
    }
}

// ---------------------------------------------------------------------------
// Heat conduction, u_t = div((1 + u) grad u) with zero-flux boundaries.
// Vertex-centred finite volumes; conductivity frozen at the previous step,
// so each step is one SPD solve (V + dt K(u_old)) u = V u_old.

void heat2d_steps(const PdeProblem& problem, MatrixXd& states, FomStats& stats) {
    const auto& ax = problem.grid.axes[0];
    const auto& ay = problem.grid.axes[1];
    const std::size_t nx = ax.nodes;
    const std::size_t ny = ay.nodes;
    const auto nodes = static_cast<Eigen::Index>(nx * ny);
    const double hx = ax.spacing();
    const double hy = ay.spacing();
    const double dt = problem.time.dt;

    auto width = [](std::size_t i, std::size_t n, double h) {
        return (i == 0 || i + 1 == n) ? 0.5 * h : h;
    };
    VectorXd volume(nodes);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            volume[static_cast<Eigen::Index>(iy * nx + ix)] = width(ix, nx, hx) * width(iy, ny, hy);
        }
    }

    Eigen::SparseMatrix<double> a(nodes, nodes);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nodes) * 5);
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(problem.linear_tolerance);
    cg.setMaxIterations(5000);

    VectorXd u(nodes), rhs(nodes);
    for (std::size_t step = 1; step <= problem.time.n_steps; ++step) {
        const VectorXd u_old = states.col(static_cast<Eigen::Index>(step - 1));
        triplets.clear();
        for (Eigen::Index i = 0; i < nodes; ++i) triplets.emplace_back(i, i, volume[i]);
        auto add_face = [&](Eigen::Index p, Eigen::Index q, double conductance) {
            const double k_face = 1.0 + 0.5 * (u_old[p] + u_old[q]);
            const double c = dt * k_face * conductance;
            triplets.emplace_back(p, p, c);
            triplets.emplace_back(q, q, c);
            triplets.emplace_back(p, q, -c);
            triplets.emplace_back(q, p, -c);
        };
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const auto p = static_cast<Eigen::Index>(iy * nx + ix);
                if (ix + 1 < nx) add_face(p, p + 1, width(iy, ny, hy) / hx);
                if (iy + 1 < ny) add_face(p, p + static_cast<Eigen::Index>(nx), width(ix, nx, hx) / hy);
            }
        }
        a.setFromTriplets(triplets.begin(), triplets.end());
        rhs = volume.cwiseProduct(u_old);
        cg.compute(a);
        u = cg.solveWithGuess(rhs, u_old);
        stats.linear_iterations += static_cast<std::size_t>(cg.iterations());
        if (cg.info() != Eigen::Success) {
            throw SolverDivergenceError("heat2d: linear solve failed at step " + std::to_string(step),
                                        step);
        }
        check_finite(u, step, problem.kind);
        states.col(static_cast<Eigen::Index>(step)) = u;
    }
}

// ---------------------------------------------------------------------------
// Radial advection, u_t = -v.grad(u), first-order upwind, classical RK4.

void advect2d_steps(const PdeProblem& problem, MatrixXd& states, FomStats&) {
    const auto& ax = problem.grid.axes[0];
    const auto& ay = problem.grid.axes[1];
    const std::size_t nx = ax.nodes;
    const std::size_t nodes = problem.grid.node_count();
    const double dx = ax.spacing();
    const double dy = ay.spacing();
    const double dt = problem.time.dt;
    const auto stride = static_cast<Eigen::Index>(nx);

    struct Stencil {
        Eigen::Index node;
        double vx;
        double vy;
    };
    std::vector<Stencil> interior;
    for (std::size_t node = 0; node < nodes; ++node) {
        if (problem.grid.on_boundary(node)) continue;
        const auto x = problem.grid.node_coordinates(node);
        const double d = std::pow((1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1]), 2);
        const double scale = 0.5 * std::numbers::pi * d;
        interior.push_back({static_cast<Eigen::Index>(node), scale * x[1], -scale * x[0]});
    }

    auto rhs = [&](const VectorXd& u, VectorXd& f) {
        f.setZero();
        for (const auto& s : interior) {
            const Eigen::Index i = s.node;
            const double dudx = s.vx > 0.0 ? (u[i] - u[i - 1]) / dx : (u[i + 1] - u[i]) / dx;
            const double dudy = s.vy > 0.0 ? (u[i] - u[i - stride]) / dy : (u[i + stride] - u[i]) / dy;
            f[i] = -(s.vx * dudx + s.vy * dudy);
        }
    };

    const auto n = static_cast<Eigen::Index>(nodes);
    VectorXd u(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t step = 1; step <= problem.time.n_steps; ++step) {
        u = states.col(static_cast<Eigen::Index>(step - 1));
        rhs(u, k1);
        tmp = u + 0.5 * dt * k1;
        rhs(tmp, k2);
        tmp = u + 0.5 * dt * k2;
        rhs(tmp, k3);
        tmp = u + dt * k3;
        rhs(tmp, k4);
        u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(u, step, problem.kind);
        states.col(static_cast<Eigen::Index>(step)) = u;
    }
}

}  // namespace

double initial_condition_at(const PdeProblem& problem, const ParameterPoint& param,
                            std::span<const double> x, std::size_t component) {
    if (x.size() != problem.grid.dimension()) {
        throw ShapeError("initial_condition_at: coordinate dimension mismatch");
    }
    if (component >= problem.grid.components) {
        throw IndexError("initial_condition_at: component out of range");
    }
    check_parameter(problem, param, DomainCheck::allow_outside);
    switch (problem.kind) {
        case ProblemKind::burgers1d:
            return param[0] * std::exp(-x[0] * x[0] / param[1]);
        case ProblemKind::burgers2d:
            return param[0] * std::exp(-(x[0] * x[0] + x[1] * x[1]) / param[1]);
        case ProblemKind::heat2d:
            return param[1] * std::sin(param[0] * (x[0] + x[1])) + param[1];
        case ProblemKind::advect2d:
            return std::sin(std::numbers::pi * param[0] * x[0]) *
                   std::sin(std::numbers::pi * param[0] * x[1]);
    }
    return 0.0;
}

VectorXd initial_condition(const PdeProblem& problem, const ParameterPoint& param, DomainCheck check) {
    check_parameter(problem, param, check);
    const std::size_t nodes = problem.grid.node_count();
    VectorXd u(static_cast<Eigen::Index>(problem.grid.dof_count()));
    const bool dirichlet = has_dirichlet_boundary(problem.kind);
    for (std::size_t node = 0; node < nodes; ++node) {
        const auto x = problem.grid.node_coordinates(node);
        const bool fixed = dirichlet && problem.grid.on_boundary(node);
        for (std::size_t c = 0; c < problem.grid.components; ++c) {
            u[static_cast<Eigen::Index>(c * nodes + node)] =
                fixed ? 0.0 : initial_condition_at(problem, param, x, c);
        }
    }
    return u;
}

StateTrajectory integrate_fom(const PdeProblem& problem, const VectorXd& u0,
                              const ParameterPoint& param, FomStats* stats) {
    if (static_cast<std::size_t>(u0.size()) != problem.grid.dof_count()) {
        throw ShapeError("integrate_fom: initial state has " + std::to_string(u0.size()) +
                         " entries, grid has " + std::to_string(problem.grid.dof_count()) + " dofs");
    }
    const std::size_t expected_dim = problem.kind == ProblemKind::burgers1d ? 1 : 2;
    if (problem.grid.dimension() != expected_dim) {
        throw ShapeError(std::string(to_string(problem.kind)) + " requires a " +
                         std::to_string(expected_dim) + "D grid");
    }
    check_finite(u0, 0, problem.kind);
    StateTrajectory traj;
    traj.parameter = param;
    traj.states.resize(u0.size(), static_cast<Eigen::Index>(problem.time.n_steps + 1));
    traj.states.col(0) = u0;

    FomStats local;
    switch (problem.kind) {
        case ProblemKind::burgers1d: burgers1d_steps(problem, traj.states, local); break;
        case ProblemKind::burgers2d: burgers2d_steps(problem, traj.states, local); break;
        case ProblemKind::heat2d: heat2d_steps(problem, traj.states, local); break;
        case ProblemKind::advect2d: advect2d_steps(problem, traj.states, local); break;
    }
    if (stats) *stats = local;
    return traj;
}

StateTrajectory solve_fom(const PdeProblem& problem, const ParameterPoint& param, DomainCheck check,
                          FomStats* stats) {
    return integrate_fom(problem, initial_condition(problem, param, check), param, stats);
}

double measure_fom_walltime(const PdeProblem& problem, const ParameterPoint& param, DomainCheck check) {
    const auto start = std::chrono::steady_clock::now();
    const StateTrajectory traj = solve_fom(problem, param, check);
    const auto stop = std::chrono::steady_clock::now();
    (void)traj;
    return std::chrono::duration<double>(stop - start).count();
}

}  // namespace lasdi
