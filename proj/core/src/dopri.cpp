#include "lasdi/dopri.hpp"

#include "lasdi/error.hpp"
#include "lasdi/library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lasdi {

namespace {

using Eigen::VectorXd;

// Dormand-Prince tableau. The right-hand side is autonomous, so the nodes c_i are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

double rms_scaled(const VectorXd& v, const VectorXd& scale) {
    if (v.size() == 0) return 0.0;
    return std::sqrt((v.array() / scale.array()).square().mean());
}

}  // namespace

void OdeSolverConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw Error("ODE solver tolerances must be positive");
    if (initial_step < 0.0 || min_step < 0.0 || max_step < 0.0) throw Error("ODE solver step sizes must be >= 0");
    if (max_step > 0.0 && min_step > max_step) throw Error("ODE solver min_step exceeds max_step");
    if (!(safety > 0.0 && safety <= 1.0)) throw Error("ODE solver safety factor must lie in (0, 1]");
    if (!(min_factor > 0.0 && min_factor <= 1.0 && max_factor >= 1.0)) {
        throw Error("ODE solver step factors must satisfy 0 < min_factor <= 1 <= max_factor");
    }
    if (max_steps == 0) throw Error("ODE solver max_steps must be positive");
}

Eigen::MatrixXd integrate_dopri(const OdeRhs& f, const VectorXd& z0, const TimeGrid& time,
                                const OdeSolverConfig& cfg, DopriStats* stats) {
    cfg.validate();
    if (!z0.allFinite()) throw BlowUpError("latent initial condition is not finite", 0.0);
    const Eigen::Index n = z0.size();
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(time.n_steps + 1));
    out.col(0) = z0;
    if (time.n_steps == 0) return out;

    const double t_final = time.t_final();
    const double min_step = cfg.min_step > 0.0 ? cfg.min_step : 1e-12 * std::max(1.0, t_final);
    const double max_step = cfg.max_step > 0.0 ? cfg.max_step : std::numeric_limits<double>::infinity();
    DopriStats local;
    DopriStats& st = stats ? *stats : local;

    VectorXd z = z0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), z5(n), err(n), scale(n);
    f(z, k1);
    ++st.rhs_evaluations;
    if (!k1.allFinite()) throw BlowUpError("latent right-hand side is not finite at t = 0", 0.0);

    double h = cfg.initial_step;
    if (h <= 0.0) {
        scale = (cfg.atol + cfg.rtol * z.array().abs()).matrix();
        const double d0 = rms_scaled(z, scale);
        const double d1 = rms_scaled(k1, scale);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_final);
        tmp = z + h0 * k1;
        f(tmp, k2);
        ++st.rhs_evaluations;
        const double d2 = rms_scaled(k2 - k1, scale) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
        h = std::min(100.0 * h0, h1);
    }
    h = std::clamp(h, min_step, max_step);

    double t = 0.0;
    bool last_rejected = false;
    std::size_t steps = 0;
    for (std::size_t step = 1; step <= time.n_steps; ++step) {
        const double target = time.time(step);
        while (t < target) {
            if (++steps > cfg.max_steps) {
                throw StiffnessError("latent integration exceeded " + std::to_string(cfg.max_steps) + " steps", t);
            }
            double h_try = h;
            bool lands = false;
            if (t + h_try >= target - 1e-12 * h_try) {
                h_try = target - t;
                lands = true;
            }
            if (h_try < min_step && !lands) {
                throw StiffnessError("latent integration step fell below " + std::to_string(min_step) +
                                         " at t = " + std::to_string(t) + "; the identified system is likely stiff",
                                     t);
            }
            tmp = z + h_try * (a21 * k1);
            f(tmp, k2);
            tmp = z + h_try * (a31 * k1 + a32 * k2);
            f(tmp, k3);
            tmp = z + h_try * (a41 * k1 + a42 * k2 + a43 * k3);
            f(tmp, k4);
            tmp = z + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(tmp, k5);
            tmp = z + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(tmp, k6);
            z5 = z + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(z5, k7);
            st.rhs_evaluations += 6;

            if (!z5.allFinite() || !k7.allFinite()) {
                throw BlowUpError("latent state became non-finite near t = " + std::to_string(t) +
                                      "; the identified dynamics are unstable",
                                  t);
            }
            err = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            scale = (cfg.atol + cfg.rtol * z.array().abs().max(z5.array().abs())).matrix();
            const double e = rms_scaled(err, scale);

            double factor = e == 0.0 ? cfg.max_factor : cfg.safety * std::pow(e, -0.2);
            factor = std::clamp(factor, cfg.min_factor, cfg.max_factor);
            if (e <= 1.0) {
                t = lands ? target : t + h_try;
                z = z5;
                k1 = k7;
                ++st.accepted;
                if (last_rejected) factor = std::min(factor, 1.0);
                last_rejected = false;
                const double proposal = h_try * factor;
                h = lands ? std::max(h, proposal) : proposal;
            } else {
                ++st.rejected;
                last_rejected = true;
                h = h_try * factor;
                if (h < min_step) {
                    throw StiffnessError("latent integration step fell below " + std::to_string(min_step) +
                                             " at t = " + std::to_string(t) +
                                             "; the identified system is likely stiff",
                                         t);
                }
            }
            h = std::min(h, max_step);
        }
        out.col(static_cast<Eigen::Index>(step)) = z;
    }
    return out;
}

Eigen::MatrixXd integrate_dopri(const CoefficientMatrix& c, const VectorXd& w0, const TimeGrid& time,
                                const OdeSolverConfig& config, DopriStats* stats) {
    const Library lib(c.spec);
    if (static_cast<std::size_t>(c.xi.rows()) != lib.size() || static_cast<std::size_t>(c.xi.cols()) != c.spec.latent_dim) {
        throw ShapeError("coefficient matrix shape does not match its library");
    }
    if (static_cast<std::size_t>(w0.size()) != c.spec.latent_dim) {
        throw ShapeError("latent initial condition has " + std::to_string(w0.size()) + " entries, expected " +
                         std::to_string(c.spec.latent_dim));
    }
    const Eigen::MatrixXd xi_t = c.xi.transpose();
    VectorXd theta(static_cast<Eigen::Index>(lib.size()));
    auto rhs = [&](const VectorXd& z, VectorXd& dz) {
        lib.evaluate(z, theta);
        dz.noalias() = xi_t * theta;
    };
    return integrate_dopri(rhs, w0, time, config, stats);
}

}  // namespace lasdi
