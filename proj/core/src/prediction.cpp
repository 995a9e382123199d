#include "lasdi/prediction.hpp"

#include "lasdi/diagnostics.hpp"
#include "lasdi/error.hpp"
#include "lasdi/text.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

namespace lasdi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string point_text(const ParameterPoint& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += text::format_double(p[i]);
    }
    return s + ")";
}

std::vector<double> distinct_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t index_of(const std::vector<double>& axis, double v) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

// Per-point work shared by the sweep and the timing pass.
struct PointOutcome {
    std::vector<double> errors;
    std::vector<double> margins;
    std::vector<std::string> failures;
    double fom_seconds = 0.0;
    std::vector<double> lasdi_seconds;
};

PointOutcome run_point(const std::vector<EvalModel>& models, const PdeProblem& problem, const ParameterPoint& p,
                       const EvalOptions& opt) {
    const std::size_t m = models.size();
    PointOutcome out;
    out.errors.assign(m, std::numeric_limits<double>::quiet_NaN());
    out.margins.assign(m, std::numeric_limits<double>::quiet_NaN());
    out.lasdi_seconds.assign(m, std::numeric_limits<double>::quiet_NaN());

    StateTrajectory reference;
    try {
        const auto start = Clock::now();
        reference = solve_fom(problem, p);
        out.fom_seconds = seconds_since(start);
    } catch (const Error& e) {
        out.failures.push_back("FOM at " + point_text(p) + ": " + e.what());
        out.fom_seconds = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    for (std::size_t k = 0; k < m; ++k) {
        try {
            const auto start = Clock::now();
            const auto pred = predict(*models[k].compressor, *models[k].ensemble, problem, p, opt.ode);
            out.lasdi_seconds[k] = seconds_since(start);
            out.errors[k] = max_relative_error(pred.states, reference.states);
            if (opt.check_lower_bound && models[k].compressor->is_pod()) {
                out.margins[k] = projection_margin(models[k].compressor->pod(), pred.states, reference.states);
            }
        } catch (const Error& e) {
            out.failures.push_back(models[k].name + " at " + point_text(p) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

Eigen::VectorXd latent_initial_condition(const Compressor& c, const Eigen::VectorXd& u0, double scale) {
    Eigen::VectorXd z = c.encode(u0);
    if (scale != 1.0) z /= scale;
    return z;
}

Eigen::MatrixXd reconstruct(const Compressor& c, const Eigen::MatrixXd& latent, double scale) {
    if (scale == 1.0) return c.decode(latent);
    return c.decode(latent * scale);
}

PredictedTrajectory predict(const Compressor& c, const DiEnsemble& e, const PdeProblem& problem,
                            const ParameterPoint& param, const OdeSolverConfig& ode, DomainCheck check) {
    const Eigen::VectorXd u0 = initial_condition(problem, param, check);
    const auto coeffs = e.coefficients(param);
    const Eigen::VectorXd w0 = latent_initial_condition(c, u0, coeffs->scale);
    Eigen::MatrixXd w = integrate_dopri(*coeffs, w0, problem.time, ode);
    PredictedTrajectory out;
    out.parameter = param;
    out.states = reconstruct(c, w, coeffs->scale);
    if (coeffs->scale != 1.0) w *= coeffs->scale;
    out.latent = std::move(w);
    return out;
}

std::vector<double> relative_errors(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference) {
    if (predicted.rows() != reference.rows() || predicted.cols() != reference.cols()) {
        throw ShapeError("relative error: predicted is " + std::to_string(predicted.rows()) + "x" +
                         std::to_string(predicted.cols()) + ", reference is " + std::to_string(reference.rows()) +
                         "x" + std::to_string(reference.cols()));
    }
    std::vector<double> out;
    for (Eigen::Index n = 1; n < reference.cols(); ++n) {
        const double denom = reference.col(n).norm();
        if (denom == 0.0) {
            throw DivisionError("relative error: reference state at step " + std::to_string(n) + " has zero norm",
                                static_cast<std::size_t>(n));
        }
        out.push_back((predicted.col(n) - reference.col(n)).norm() / denom);
    }
    return out;
}

double max_relative_error(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference) {
    const auto e = relative_errors(predicted, reference);
    double worst = 0.0;
    for (double v : e) {
        if (std::isnan(v)) return v;
        worst = std::max(worst, v);
    }
    return worst;
}

double projection_margin(const PodBasis& pod, const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference) {
    if (predicted.rows() != reference.rows() || predicted.cols() != reference.cols()) {
        throw ShapeError("projection_margin: predicted and reference shapes differ");
    }
    const Eigen::MatrixXd residual = reference - pod.basis * (pod.basis.transpose() * reference);
    double margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < reference.cols(); ++n) {
        const double rom = (predicted.col(n) - reference.col(n)).norm();
        margin = std::min(margin, rom - residual.col(n).norm());
    }
    return margin;
}

std::size_t ErrorReport::argmin() const {
    std::size_t best = npos;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (std::isfinite(errors[i]) && (best == npos || errors[i] < errors[best])) best = i;
    }
    return best;
}

std::size_t ErrorReport::argmax() const {
    std::size_t best = npos;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (std::isfinite(errors[i]) && (best == npos || errors[i] > errors[best])) best = i;
    }
    return best;
}

double ErrorReport::min_error() const {
    const auto i = argmin();
    return i == npos ? std::numeric_limits<double>::quiet_NaN() : errors[i];
}

double ErrorReport::max_error() const {
    const auto i = argmax();
    return i == npos ? std::numeric_limits<double>::quiet_NaN() : errors[i];
}

Evaluation evaluate_testset(const std::vector<EvalModel>& models, const PdeProblem& problem,
                            const std::vector<ParameterPoint>& points, const EvalOptions& opt) {
    for (const auto& m : models) {
        if (!m.compressor || !m.ensemble) throw Error("evaluate_testset: model '" + m.name + "' is incomplete");
    }
    const std::size_t n = points.size();
    const std::size_t m = models.size();
    std::vector<PointOutcome> outcomes(n);

    const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) outcomes[i] = run_point(models, problem, points[i], opt);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) outcomes[i] = run_point(models, problem, points[i], opt);
            });
        }
        for (auto& t : workers) t.join();
    }

    Evaluation eval;
    eval.errors.resize(m);
    eval.lower_bounds.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        eval.errors[k].model = models[k].name;
        eval.errors[k].points = points;
        eval.errors[k].errors.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& f : outcomes[i].failures) {
            diag::warn("evaluation failure: " + f);
            eval.failures.push_back(f);
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double e = outcomes[i].errors[k];
            eval.errors[k].errors[i] = e;
            if (std::isnan(e)) ++eval.errors[k].failed;
            const double margin = outcomes[i].margins[k];
            if (!std::isnan(margin)) {
                auto& lb = eval.lower_bounds[k];
                ++lb.trajectories;
                lb.min_margin = std::min(lb.min_margin, margin);
                if (margin < -opt.lower_bound_slack) {
                    ++lb.violations;
                    diag::warn(models[k].name + " at " + point_text(points[i]) +
                               ": reconstruction error below the projection error by " + text::format_double(-margin));
                }
            }
        }
    }

    if (opt.timing && n > 0) {
        std::vector<std::size_t> sample;
        if (jobs == 1) {
            for (std::size_t i = 0; i < n; ++i) sample.push_back(i);
        } else {
            const std::size_t count = std::min(std::max<std::size_t>(1, opt.timing_samples), n);
            for (std::size_t j = 0; j < count; ++j) sample.push_back(j * n / count);
            for (auto i : sample) outcomes[i] = run_point(models, problem, points[i], opt);
        }
        eval.speedups.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            auto& s = eval.speedups[k];
            s.model = models[k].name;
            double fom = 0.0, rom = 0.0;
            for (auto i : sample) {
                const auto& o = outcomes[i];
                if (std::isnan(o.fom_seconds) || std::isnan(o.lasdi_seconds[k])) continue;
                fom += o.fom_seconds;
                rom += o.lasdi_seconds[k];
                ++s.samples;
            }
            if (s.samples > 0) {
                s.mean_fom_seconds = fom / static_cast<double>(s.samples);
                s.mean_lasdi_seconds = rom / static_cast<double>(s.samples);
            }
        }
    }
    return eval;
}

void write_heatmap_csv(const ErrorReport& report, const std::vector<std::string>& axis_names,
                       const std::filesystem::path& path) {
    auto out = open_csv(path);
    const std::size_t dim = report.points.empty() ? axis_names.size() : report.points.front().size();
    if (dim == 1) {
        std::vector<double> xs;
        for (const auto& p : report.points) xs.push_back(p[0]);
        out << (axis_names.empty() ? "param1" : axis_names[0]);
        for (double x : xs) out << ',' << text::format_double(x);
        out << "\nerror";
        for (double e : report.errors) out << ',' << text::format_double(e);
        out << '\n';
        return;
    }
    if (dim != 2 && !report.points.empty()) {
        throw ShapeError("heat-map CSV requires a 1D or 2D parameter space");
    }
    std::vector<double> xs, ys;
    for (const auto& p : report.points) {
        xs.push_back(p[0]);
        ys.push_back(p[1]);
    }
    xs = distinct_sorted(xs);
    ys = distinct_sorted(ys);
    Eigen::MatrixXd grid = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ys.size()),
                                                     static_cast<Eigen::Index>(xs.size()),
                                                     std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        grid(static_cast<Eigen::Index>(index_of(ys, report.points[i][1])),
             static_cast<Eigen::Index>(index_of(xs, report.points[i][0]))) = report.errors[i];
    }
    const std::string x_name = axis_names.size() > 0 ? axis_names[0] : "param1";
    const std::string y_name = axis_names.size() > 1 ? axis_names[1] : "param2";
    out << y_name << '\\' << x_name;
    for (double x : xs) out << ',' << text::format_double(x);
    out << '\n';
    for (std::size_t r = 0; r < ys.size(); ++r) {
        out << text::format_double(ys[r]);
        for (std::size_t c = 0; c < xs.size(); ++c) {
            out << ',' << text::format_double(grid(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
}

void write_points_csv(const Evaluation& eval, const std::vector<std::string>& axis_names,
                      const std::filesystem::path& path) {
    auto out = open_csv(path);
    const std::size_t dim = eval.errors.empty() || eval.errors.front().points.empty()
                                ? axis_names.size()
                                : eval.errors.front().points.front().size();
    for (std::size_t d = 0; d < dim; ++d) {
        if (d) out << ',';
        out << (d < axis_names.size() ? axis_names[d] : "param" + std::to_string(d + 1));
    }
    for (const auto& r : eval.errors) out << ",error_" << r.model;
    out << '\n';
    if (eval.errors.empty()) return;
    const auto& points = eval.errors.front().points;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            if (d) out << ',';
            out << text::format_double(points[i][d]);
        }
        for (const auto& r : eval.errors) out << ',' << text::format_double(r.errors[i]);
        out << '\n';
    }
}

void write_summary_csv(const Evaluation& eval, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "model,min_error,min_at,max_error,max_at,mean_fom_seconds,mean_lasdi_seconds,speedup,points,failed\n";
    auto where = [](const ErrorReport& r, std::size_t i) {
        if (i == ErrorReport::npos) return std::string();
        std::string s;
        for (std::size_t d = 0; d < r.points[i].size(); ++d) {
            if (d) s += ' ';
            s += text::format_double(r.points[i][d]);
        }
        return s;
    };
    for (std::size_t k = 0; k < eval.errors.size(); ++k) {
        const auto& r = eval.errors[k];
        out << r.model << ',' << text::format_double(r.min_error()) << ',' << where(r, r.argmin()) << ','
            << text::format_double(r.max_error()) << ',' << where(r, r.argmax()) << ',';
        if (k < eval.speedups.size() && eval.speedups[k].samples > 0) {
            const auto& s = eval.speedups[k];
            out << text::format_double(s.mean_fom_seconds) << ',' << text::format_double(s.mean_lasdi_seconds) << ','
                << text::format_double(s.ratio());
        } else {
            out << ",,";
        }
        out << ',' << r.points.size() << ',' << r.failed << '\n';
    }
}

}  // namespace lasdi
