// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// CSVs for the plotting scripts are left in $LASDI_ACCEPTANCE_OUT (default
// ./acceptance_out).

#include "lasdi/compressor.hpp"
#include "lasdi/diagnostics.hpp"
#include "lasdi/ensemble.hpp"
#include "lasdi/fom.hpp"
#include "lasdi/prediction.hpp"
#include "lasdi/snapshot.hpp"
#include "lasdi/text.hpp"
#include "lasdi_app/config.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace lasdi;
using namespace lasdi::app;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Verdict> verdicts;

void report(const std::string& name, bool pass, const std::string& detail) {
    verdicts.push_back({name, pass, detail});
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string pct(double v) {
    std::ostringstream s;
    s.precision(4);
    s << 100.0 * v << "%";
    return s.str();
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path out_dir() {
    const char* env = std::getenv("LASDI_ACCEPTANCE_OUT");
    fs::path p = env && *env ? fs::path(env) : fs::path("acceptance_out");
    fs::create_directories(p);
    return p;
}

// Training solves shared by every model of one problem.
class FomCache {
public:
    explicit FomCache(PdeProblem problem) : problem_(std::move(problem)) {}

    SnapshotMatrix snapshots(const std::vector<ParameterPoint>& points) {
        std::vector<StateTrajectory> t;
        for (const auto& p : points) {
            auto it = cache_.find(p.values);
            if (it == cache_.end()) it = cache_.emplace(p.values, solve_fom(problem_, p)).first;
            t.push_back(it->second);
        }
        return assemble(t, SnapshotMeta{problem_.kind, problem_.grid, problem_.time.dt});
    }
    const PdeProblem& problem() const { return problem_; }

private:
    PdeProblem problem_;
    std::map<std::vector<double>, StateTrajectory> cache_;
};

struct Model {
    std::string name;
    std::unique_ptr<Compressor> compressor;
    std::unique_ptr<DiEnsemble> ensemble;
    std::vector<double> singular_values;
};

Model build(const std::string& name, const RunConfig& c, FomCache& fom) {
    const SnapshotMatrix s = fom.snapshots(c.train.expand());
    Model m;
    m.name = name;
    if (c.compressor.type == CompressorConfig::Type::pod) {
        PodBasis pod = compute_pod(s, c.compressor.latent_dim);
        m.singular_values.assign(pod.singular_values.data(), pod.singular_values.data() + pod.singular_values.size());
        m.compressor = std::make_unique<Compressor>(std::move(pod));
    } else {
        AutoencoderConfig cfg = c.compressor.autoencoder;
        cfg.latent_dim = c.compressor.latent_dim;
        m.compressor = std::make_unique<Compressor>(train_autoencoder(s.data(), s.meta().grid, cfg));
    }
    const LatentSnapshotMatrix latent = encode_snapshots(*m.compressor, s);
    m.ensemble = std::make_unique<DiEnsemble>(
        DiEnsemble::fit(latent, c.library, fom.problem().time.dt, c.strategy, c.rescale));
    return m;
}

std::vector<EvalModel> eval_models(const std::vector<Model>& models) {
    std::vector<EvalModel> out;
    for (const auto& m : models) out.push_back(EvalModel{m.name, m.compressor.get(), m.ensemble.get()});
    return out;
}

const ErrorReport& errors_of(const Evaluation& e, const std::string& name) {
    for (const auto& r : e.errors) {
        if (r.model == name) return r;
    }
    throw Error("no model " + name);
}

std::size_t index_of(const Evaluation& e, const std::string& name) {
    for (std::size_t k = 0; k < e.errors.size(); ++k) {
        if (e.errors[k].model == name) return k;
    }
    throw Error("no model " + name);
}

std::string where(const ErrorReport& r, std::size_t i) {
    if (i == ErrorReport::npos) return "none";
    std::string s = "(";
    for (std::size_t d = 0; d < r.points[i].size(); ++d) s += (d ? ", " : "") + text::format_double(r.points[i][d]);
    return s + ")";
}

// A criterion with finite errors at every point and a maximum within `limit`.
void check_max(const std::string& name, const ErrorReport& r, double limit) {
    const bool complete = r.failed == 0 && !r.errors.empty();
    const double mx = r.max_error();
    report(name, complete && mx <= limit,
           "max relative error " + pct(mx) + " at " + where(r, r.argmax()) + " over " +
               std::to_string(r.errors.size()) + " points, " + std::to_string(r.failed) + " failed (limit " +
               pct(limit) + ")");
}

void write_sv_csv(const Model& m, const fs::path& path) {
    std::ofstream out(path);
    double total = 0.0;
    for (double s : m.singular_values) total += s * s;
    out << "index,sigma,mass\n";
    double acc = 0.0;
    for (std::size_t i = 0; i < m.singular_values.size(); ++i) {
        acc += m.singular_values[i] * m.singular_values[i];
        out << (i + 1) << ',' << text::format_double(m.singular_values[i]) << ',' << text::format_double(acc / total)
            << '\n';
    }
}

void write_showcase(const Model& m, const PdeProblem& problem, const ParameterPoint& p, const fs::path& dir) {
    const auto pred = predict(*m.compressor, *m.ensemble, problem, p);
    const auto ref = solve_fom(problem, p);
    std::ofstream prof(dir / ("profile_" + m.name + ".csv"));
    prof << "x,fom,lasdi\n";
    const auto n = pred.states.cols() - 1;
    const auto& ax = problem.grid.axes[0];
    for (Eigen::Index i = 0; i < pred.states.rows(); ++i) {
        const double x = ax.coordinate(static_cast<std::size_t>(i));
        prof << text::format_double(x) << ',' << text::format_double(ref.states(i, n)) << ','
             << text::format_double(pred.states(i, n)) << '\n';
    }
    std::ofstream lat(dir / ("latent_" + m.name + ".csv"));
    lat << "t";
    for (Eigen::Index k = 0; k < pred.latent.rows(); ++k) lat << ",z" << (k + 1);
    lat << '\n';
    for (Eigen::Index j = 0; j < pred.latent.cols(); ++j) {
        lat << text::format_double(problem.time.dt * static_cast<double>(j));
        for (Eigen::Index k = 0; k < pred.latent.rows(); ++k) lat << ',' << text::format_double(pred.latent(k, j));
        lat << '\n';
    }
}

void add_lower_bounds(const Evaluation& e, const std::vector<std::string>& pod_models,
                       std::size_t& trajectories, std::size_t& violations, double& min_margin) {
    for (const auto& m : pod_models) {
        const auto& lb = e.lower_bounds.at(index_of(e, m));
        trajectories += lb.trajectories;
        violations += lb.violations;
        min_margin = std::min(min_margin, lb.min_margin);
    }
}

double speedup_of(const Evaluation& e, const std::string& name) {
    return e.speedups.empty() ? 0.0 : e.speedups.at(index_of(e, name)).ratio();
}

}  // namespace

int main() {
    const fs::path out = out_dir();
    std::size_t lb_traj = 0, lb_viol = 0;
    double lb_margin = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::string, double>> speedups;
    std::vector<std::string> warnings;
    diag::ScopedSink sink([&](const std::string& m) { warnings.push_back(m); });

    try {
        // 1D Burgers: LaSDI-LS with 4 training points and LaSDI-NM with 4, 9 and 25.
        auto t0 = Clock::now();
        const RunConfig ls = preset("burgers1d-4pt");
        FomCache fom(ls.problem.build());
        std::vector<Model> models;
        models.push_back(build("ls-4", ls, fom));
        for (const char* n : {"4", "9", "25"}) {
            models.push_back(build(std::string("nm-") + n, preset(std::string("burgers1d-") + n + "pt-nm"), fom));
        }
        std::cout << "burgers1d: trained 4 models in " << fixed(seconds_since(t0), 1) << " s" << std::endl;
        t0 = Clock::now();
        EvalOptions opt;
        opt.ode = ls.ode;
        const Evaluation e = evaluate_testset(eval_models(models), fom.problem(), ls.test.expand(), opt);
        std::cout << "burgers1d: evaluated " << e.errors.front().errors.size() << " test points in "
                  << fixed(seconds_since(t0), 1) << " s" << std::endl;
        const auto& names = fom.problem().domain.names;
        for (const auto& r : e.errors) write_heatmap_csv(r, names, out / ("heatmap_burgers1d_" + r.model + ".csv"));
        write_points_csv(e, names, out / "errors_burgers1d.csv");
        write_summary_csv(e, out / "summary_burgers1d.csv");
        write_sv_csv(models.front(), out / "sv_burgers1d.csv");
        for (const auto& m : models) write_showcase(m, fom.problem(), *ls.showcase, out);

        check_max("burgers1d LaSDI-LS 4 training points", errors_of(e, "ls-4"), 0.05);
        check_max("burgers1d LaSDI-NM 4 training points", errors_of(e, "nm-4"), 0.15);
        const double m4 = errors_of(e, "nm-4").max_error();
        const double m9 = errors_of(e, "nm-9").max_error();
        const double m25 = errors_of(e, "nm-25").max_error();
        const bool complete = errors_of(e, "nm-4").failed + errors_of(e, "nm-9").failed +
                                  errors_of(e, "nm-25").failed == 0;
        report("burgers1d LaSDI-NM error decreases 4 -> 9 -> 25", complete && m4 > m9 && m9 > m25,
               "max errors " + pct(m4) + " -> " + pct(m9) + " -> " + pct(m25));
        add_lower_bounds(e, {"ls-4"}, lb_traj, lb_viol, lb_margin);
        speedups.emplace_back("burgers1d", speedup_of(e, "ls-4"));
    } catch (const std::exception& ex) {
        report("burgers1d", false, std::string("pipeline failed: ") + ex.what());
    }

    try {
        // Heat conduction: LaSDI-LS with n_s = 2..5 on a coarsened test grid.
        auto t0 = Clock::now();
        RunConfig heat = preset("heat-21pt");
        heat.test = ParameterSet{{Range{0.2, 5.0, 0.2}, Range{1.8, 2.2, 0.1}}, {}};
        FomCache fom(heat.problem.build());
        std::vector<Model> models;
        for (std::size_t n_s = 2; n_s <= 5; ++n_s) {
            RunConfig c = heat;
            c.compressor.latent_dim = n_s;
            c.library.latent_dim = n_s;
            models.push_back(build("ls-" + std::to_string(n_s), c, fom));
        }
        EvalOptions opt;
        opt.ode = heat.ode;
        const Evaluation e = evaluate_testset(eval_models(models), fom.problem(), heat.test.expand(), opt);
        std::cout << "heat2d: " << e.errors.front().errors.size() << " test points in " << fixed(seconds_since(t0), 1)
                  << " s" << std::endl;
        const auto& names = fom.problem().domain.names;
        for (const auto& r : e.errors) write_heatmap_csv(r, names, out / ("heatmap_heat2d_" + r.model + ".csv"));
        write_points_csv(e, names, out / "errors_heat2d.csv");
        write_summary_csv(e, out / "summary_heat2d.csv");
        write_sv_csv(models.back(), out / "sv_heat2d.csv");

        check_max("heat2d LaSDI-LS n_s=5", errors_of(e, "ls-5"), 0.06);
        bool nonincreasing = true;
        std::string ranges;
        double prev_max = std::numeric_limits<double>::infinity();
        double prev_width = std::numeric_limits<double>::infinity();
        for (std::size_t n_s = 2; n_s <= 5; ++n_s) {
            const auto& r = errors_of(e, "ls-" + std::to_string(n_s));
            const double mx = r.max_error(), mn = r.min_error();
            nonincreasing = nonincreasing && r.failed == 0 && mx <= prev_max && mx - mn <= prev_width;
            prev_max = mx;
            prev_width = mx - mn;
            ranges += (ranges.empty() ? "" : ", ") + std::string("n_s=") + std::to_string(n_s) + " [" + pct(mn) +
                      ", " + pct(mx) + "]";
        }
        report("heat2d error range nonincreasing in n_s", nonincreasing, ranges);
        add_lower_bounds(e, {"ls-2", "ls-3", "ls-4", "ls-5"}, lb_traj, lb_viol, lb_margin);
        speedups.emplace_back("heat2d", speedup_of(e, "ls-5"));
    } catch (const std::exception& ex) {
        report("heat2d", false, std::string("pipeline failed: ") + ex.what());
    }

    report("lower bound: reconstruction error >= projection error", lb_traj > 0 && lb_viol == 0,
           std::to_string(lb_traj) + " LaSDI-LS trajectories, " + std::to_string(lb_viol) +
               " violations, smallest margin " + text::format_double(lb_margin));

    {
        bool ok = speedups.size() == 2;
        std::string detail;
        for (const auto& [problem, ratio] : speedups) {
            ok = ok && ratio >= 20.0;
            detail += (detail.empty() ? "" : ", ") + problem + " " + fixed(ratio, 1) + "x";
        }
        report("speedup >= 20x", ok, detail.empty() ? "no timing" : detail + " (limit 20x)");
    }

    {
        const auto t0 = Clock::now();
        const std::string cmd = std::string("\"") + LASDI_ORACLE_PATH + "\" --gtest_brief=1 > \"" +
                                (out / "oracle_suite.log").string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        const double secs = seconds_since(t0);
        const bool passed = WIFEXITED(status) && WEXITSTATUS(status) == 0;
        report("oracle suite", passed && secs < 60.0,
               std::string(passed ? "passed" : "failed") + " in " + fixed(secs, 1) + " s (limit 60 s)");
    }

    try {
        // 2D Burgers at reduced scale: 31x31 grid, t in [0, 0.4], four corner training points.
        auto t0 = Clock::now();
        RunConfig c = preset("burgers2d-25pt");
        c.problem.nodes = {31, 31};
        c.problem.dt = 2.0 / 1500.0;
        c.problem.n_steps = 300;
        c.compressor.autoencoder.hidden_width = 31 * 31;
        c.train = ParameterSet{{Range{0.7, 0.9, 0.2}, Range{0.9, 1.1, 0.2}}, {}};
        c.test = ParameterSet{{Range{0.7, 0.9, 0.1}, Range{0.9, 1.1, 0.1}}, {}};
        c.validate();
        FomCache fom(c.problem.build());
        std::vector<Model> models;
        models.push_back(build("nm-4", c, fom));
        EvalOptions opt;
        opt.ode = c.ode;
        opt.timing = false;
        const Evaluation e = evaluate_testset(eval_models(models), fom.problem(), c.test.expand(), opt);
        std::cout << "burgers2d: pipeline in " << fixed(seconds_since(t0), 1) << " s" << std::endl;
        write_heatmap_csv(e.errors.front(), fom.problem().domain.names, out / "heatmap_burgers2d_nm-4.csv");
        check_max("burgers2d LaSDI-NM reduced scale", e.errors.front(), 0.20);
    } catch (const std::exception& ex) {
        report("burgers2d LaSDI-NM reduced scale", false, std::string("pipeline failed: ") + ex.what());
    }

    std::size_t failed = 0;
    for (const auto& v : verdicts) failed += v.pass ? 0 : 1;
    std::cout << (verdicts.size() - failed) << "/" << verdicts.size() << " criteria passed, " << warnings.size()
              << " warnings" << std::endl;
    return failed == 0 ? 0 : 1;
}
