#include "lasdi/error.hpp"
#include "lasdi/fom.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace lasdi;

namespace {

PdeProblem small_burgers(std::size_t nodes = 101, std::size_t steps = 50) {
    auto p = PdeProblem::make(ProblemKind::burgers1d);
    p.grid.axes[0].nodes = nodes;
    p.time = TimeGrid{0.5 / static_cast<double>(steps), steps};
    return p;
}

}  // namespace

TEST(Grid, NodeNumberingIsFirstAxisFastest) {
    SpatialGrid g;
    g.axes = {Axis{0.0, 1.0, 3}, Axis{0.0, 2.0, 5}};
    EXPECT_EQ(g.node_count(), 15u);
    const auto x = g.node_coordinates(1 * 3 + 2);
    EXPECT_DOUBLE_EQ(x[0], 1.0);
    EXPECT_DOUBLE_EQ(x[1], 0.5);
    EXPECT_TRUE(g.on_boundary(0));
    EXPECT_TRUE(g.on_boundary(2));
    EXPECT_FALSE(g.on_boundary(1 * 3 + 1));
    EXPECT_TRUE(g.on_boundary(4 * 3 + 1));
}

TEST(Grid, VectorFieldDofsAreComponentBlocks) {
    const auto p = PdeProblem::make(ProblemKind::burgers2d);
    EXPECT_EQ(p.grid.dof_count(), 2u * 61u * 61u);
}

TEST(ProblemKind, NamesRoundTrip) {
    for (auto k : {ProblemKind::burgers1d, ProblemKind::burgers2d, ProblemKind::heat2d, ProblemKind::advect2d}) {
        EXPECT_EQ(parse_problem_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_problem_kind("wave"), Error);
}

TEST(InitialCondition, Burgers1dPeakIsAmplitude) {
    const auto p = PdeProblem::make(ProblemKind::burgers1d);
    const double x[] = {0.0};
    EXPECT_DOUBLE_EQ(initial_condition_at(p, ParameterPoint{{0.8, 1.0}}, x), 0.8);
}

TEST(InitialCondition, HeatAtOriginIsTwiceZeroPlusA) {
    const auto p = PdeProblem::make(ProblemKind::heat2d);
    const double x[] = {0.0, 0.0};
    EXPECT_DOUBLE_EQ(initial_condition_at(p, ParameterPoint{{1.0, 2.0}}, x), 2.0);
}

TEST(InitialCondition, AdvectionAtHalfHalf) {
    const auto p = PdeProblem::make(ProblemKind::advect2d);
    const double x[] = {0.5, 0.5};
    const double expected = std::pow(std::sin(0.4 * std::numbers::pi), 2);
    EXPECT_NEAR(initial_condition_at(p, ParameterPoint{{0.8}}, x), expected, 1e-15);
    EXPECT_NEAR(expected, 0.9045084971874737, 1e-15);
}

TEST(InitialCondition, DirichletNodesAreZeroed) {
    const auto p = PdeProblem::make(ProblemKind::burgers1d);
    const auto u = initial_condition(p, ParameterPoint{{0.8, 1.0}});
    EXPECT_EQ(u[0], 0.0);
    EXPECT_EQ(u[u.size() - 1], 0.0);
    EXPECT_DOUBLE_EQ(u[500], 0.8);
}

TEST(InitialCondition, HeatKeepsBoundaryValues) {
    const auto p = PdeProblem::make(ProblemKind::heat2d);
    const auto u = initial_condition(p, ParameterPoint{{1.0, 2.0}});
    EXPECT_DOUBLE_EQ(u[0], 2.0);
}

TEST(InitialCondition, OutsideDomainIsRejectedUnlessAllowed) {
    const auto p = PdeProblem::make(ProblemKind::burgers1d);
    EXPECT_THROW(initial_condition(p, ParameterPoint{{1.5, 1.0}}), DomainError);
    EXPECT_NO_THROW(initial_condition(p, ParameterPoint{{1.5, 1.0}}, DomainCheck::allow_outside));
    EXPECT_THROW(initial_condition(p, ParameterPoint{{0.8}}), ShapeError);
}

TEST(Fom, ZeroStateIsAFixedPoint) {
    const auto p = small_burgers();
    const auto traj = integrate_fom(p, Eigen::VectorXd::Zero(101));
    EXPECT_EQ(traj.states.cols(), 51);
    EXPECT_EQ(traj.states.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Fom, ConstantHeatStateStaysConstant) {
    auto p = PdeProblem::make(ProblemKind::heat2d);
    p.grid.axes = {Axis{0.0, 1.0, 17}, Axis{0.0, 1.0, 17}};
    p.time.n_steps = 10;
    const Eigen::VectorXd u0 = Eigen::VectorXd::Constant(17 * 17, 3.5);
    const auto traj = integrate_fom(p, u0);
    EXPECT_LT((traj.states.colwise() - u0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fom, HeatConservesTheIntegralUnderZeroFlux) {
    auto p = PdeProblem::make(ProblemKind::heat2d);
    p.grid.axes = {Axis{0.0, 1.0, 17}, Axis{0.0, 1.0, 17}};
    p.time.n_steps = 20;
    const auto traj = solve_fom(p, ParameterPoint{{3.0, 2.0}});
    // trapezoidal weights match the finite-volume cell sizes
    auto integral = [&](Eigen::Index col) {
        double s = 0.0;
        for (std::size_t node = 0; node < p.grid.node_count(); ++node) {
            const std::size_t ix = node % 17, iy = node / 17;
            const double wx = (ix == 0 || ix == 16) ? 0.5 : 1.0;
            const double wy = (iy == 0 || iy == 16) ? 0.5 : 1.0;
            s += wx * wy * traj.states(static_cast<Eigen::Index>(node), col);
        }
        return s;
    };
    EXPECT_NEAR(integral(20), integral(0), 1e-8 * std::abs(integral(0)));
}

TEST(Fom, BurgersKeepsDirichletValuesAndShape) {
    const auto p = small_burgers();
    const auto traj = solve_fom(p, ParameterPoint{{0.8, 1.0}});
    EXPECT_EQ(traj.states.rows(), 101);
    EXPECT_EQ(traj.n_steps(), 50u);
    EXPECT_EQ(traj.states.row(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(traj.states.row(100).cwiseAbs().maxCoeff(), 0.0);
    // inviscid Burgers with a nonnegative initial state never exceeds its initial maximum
    EXPECT_LE(traj.states.maxCoeff(), 0.8 + 1e-12);
    EXPECT_GE(traj.states.minCoeff(), -1e-12);
}

TEST(Fom, BurgersIsDeterministic) {
    const auto p = small_burgers();
    const auto a = solve_fom(p, ParameterPoint{{0.75, 0.95}});
    const auto b = solve_fom(p, ParameterPoint{{0.75, 0.95}});
    EXPECT_EQ(a.states, b.states);
}

TEST(Fom, BurgersMatchesIndependentSolver) {
    // Same scheme, independent code: must agree to Newton tolerance.
    const auto p = small_burgers(201, 100);
    const auto traj = solve_fom(p, ParameterPoint{{0.8, 1.01}});
    const Eigen::VectorXd ref = oracle::burgers1d_final(0.8, 1.01, 201, 100, 0.5);
    EXPECT_LT((traj.states.col(100) - ref).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fom, BurgersShowcaseProfileConvergesUnderRefinement) {
    // Default grid against an independent re-solve with dx/2 and dt/2.
    const auto p = PdeProblem::make(ProblemKind::burgers1d);
    const auto traj = solve_fom(p, ParameterPoint{{0.8, 1.01}});
    const Eigen::VectorXd fine = oracle::burgers1d_final(0.8, 1.01, 2001, 2000, 1.0);
    Eigen::VectorXd sampled(1001);
    for (Eigen::Index i = 0; i < 1001; ++i) sampled[i] = fine[2 * i];
    const double rel = (traj.states.col(1000) - sampled).norm() / sampled.norm();
    EXPECT_LT(rel, 0.02);
}

TEST(Fom, NewtonFailureReportsTheStep) {
    auto p = small_burgers();
    p.newton.max_iterations = 0;
    try {
        solve_fom(p, ParameterPoint{{0.8, 1.0}});
        FAIL() << "expected SolverDivergenceError";
    } catch (const SolverDivergenceError& e) {
        EXPECT_EQ(e.step(), 1u);
    }
}

TEST(Fom, NonFiniteInitialStateIsInstability) {
    const auto p = small_burgers();
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(101);
    u0[50] = std::nan("");
    try {
        integrate_fom(p, u0);
        FAIL() << "expected InstabilityError";
    } catch (const InstabilityError& e) {
        EXPECT_EQ(e.step(), 0u);
    }
}

TEST(Fom, WrongInitialSizeIsShapeError) {
    const auto p = small_burgers();
    EXPECT_THROW(integrate_fom(p, Eigen::VectorXd::Zero(7)), ShapeError);
}

TEST(Fom, AdvectionRotatesWithoutGrowth) {
    auto p = PdeProblem::make(ProblemKind::advect2d);
    p.time.n_steps = 40;
    const auto traj = solve_fom(p, ParameterPoint{{1.0}});
    // upwinding is dissipative: the max-norm cannot grow
    EXPECT_LE(traj.states.col(40).cwiseAbs().maxCoeff(), traj.states.col(0).cwiseAbs().maxCoeff() + 1e-12);
    EXPECT_GT((traj.states.col(40) - traj.states.col(0)).norm(), 0.0);
}

TEST(Fom, Burgers2dSmallGridRuns) {
    auto p = PdeProblem::make(ProblemKind::burgers2d);
    p.grid.axes = {Axis{-3.0, 3.0, 21}, Axis{-3.0, 3.0, 21}};
    p.time.n_steps = 20;
    FomStats stats;
    const auto traj = solve_fom(p, ParameterPoint{{0.8, 1.0}}, DomainCheck::strict, &stats);
    EXPECT_EQ(traj.states.rows(), 2 * 21 * 21);
    EXPECT_GT(stats.newton_iterations, 0u);
    EXPECT_LE(stats.max_accepted_residual, p.newton.tolerance);
    EXPECT_TRUE(traj.states.allFinite());
}

TEST(Fom, WalltimeIsPositiveAndStable) {
    const auto p = small_burgers(401, 200);
    const ParameterPoint mu{{0.8, 1.0}};
    (void)measure_fom_walltime(p, mu);  // warm caches and the allocator
    const double first = measure_fom_walltime(p, mu);
    const double second = measure_fom_walltime(p, mu);
    EXPECT_GT(first, 0.0);
    EXPECT_GT(second, 0.0);
    EXPECT_LT(std::abs(second - first), 0.5 * first);
}

TEST(ParameterDomain, ContainsUsesInclusiveBounds) {
    const auto p = PdeProblem::make(ProblemKind::burgers1d);
    EXPECT_TRUE(p.domain.contains(ParameterPoint{{0.7, 1.1}}));
    EXPECT_FALSE(p.domain.contains(ParameterPoint{{0.69, 1.0}}));
    EXPECT_FALSE(p.domain.contains(ParameterPoint{{0.8}}));
}

TEST(ParameterDomain, DistanceIsEuclidean) {
    EXPECT_DOUBLE_EQ(distance(ParameterPoint{{0.0, 0.0}}, ParameterPoint{{3.0, 4.0}}), 5.0);
    EXPECT_THROW(distance(ParameterPoint{{0.0}}, ParameterPoint{{0.0, 1.0}}), ShapeError);
}
