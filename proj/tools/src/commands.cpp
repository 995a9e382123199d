#include "lasdi_app/commands.hpp"

#include "lasdi/compressor.hpp"
#include "lasdi/diagnostics.hpp"
#include "lasdi/prediction.hpp"
#include "lasdi/snapshot.hpp"
#include "lasdi/text.hpp"

#include <json.hpp>

#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace lasdi::app {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::ostream& log_of(const CommandOptions& o) { return o.log ? *o.log : std::cout; }

std::size_t job_count(const CommandOptions& o) {
    if (o.deterministic) return 1;
    return std::max<std::size_t>(1, o.jobs);
}

std::string compressor_file(const RunConfig& c) {
    return c.compressor.type == CompressorConfig::Type::pod ? artifacts::pod : artifacts::autoencoder;
}

// "0.8_1.01": 12 significant digits, enough for the decimal test grids.
std::string point_label(const ParameterPoint& p) {
    std::ostringstream out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", p[i]);
        out << (i ? "_" : "") << buf;
    }
    return out.str();
}

std::string points_text(const std::vector<ParameterPoint>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : pts) a.push_back(p.values);
    return a.dump();
}

// Cache keys hash the inputs of a stage together with the tool version.
std::string stage_key(std::initializer_list<std::string> parts) {
    std::string all(tool_version());
    for (const auto& p : parts) {
        all += '\n';
        all += p;
    }
    return sha256_text(all);
}

std::string gen_key(const RunConfig& c) {
    return stage_key({section_json(c, "problem"), points_text(c.train.expand())});
}

std::string compress_key(const RunConfig& c, const std::string& snapshots_hash) {
    return stage_key({section_json(c, "compressor"), snapshots_hash});
}

std::string fit_key(const RunConfig& c, const std::string& latent_hash) {
    return stage_key({section_json(c, "library"), section_json(c, "strategy"), latent_hash});
}

std::string evaluate_key(const RunConfig& c, const std::string& model_hash, const std::string& ensemble_hash) {
    return stage_key({section_json(c, "problem"), points_text(c.test.expand()), section_json(c, "ode"),
                      section_json(c, "evaluate"), model_hash, ensemble_hash});
}

std::string recorded_hash(const RunManifest& m, const std::string& stage, const std::string& file) {
    const auto it = m.stages.find(stage);
    if (it == m.stages.end()) return {};
    const auto a = it->second.artifacts.find(file);
    return a == it->second.artifacts.end() ? std::string() : a->second;
}

void record(RunManifest& m, const fs::path& dir, const std::string& stage, const std::string& key, double seconds,
            const std::vector<std::string>& files, std::map<std::string, double> metrics = {}) {
    StageRecord r;
    r.key = key;
    r.seconds = seconds;
    for (const auto& f : files) r.artifacts[f] = sha256_file(dir / f);
    r.metrics = std::move(metrics);
    m.stages[stage] = std::move(r);
    m.tool_version = std::string(tool_version());
    m.save(dir);
}

fs::path prepare_dir(const RunConfig& config, const CommandOptions& options) {
    const fs::path dir = resolve_output(config, options);
    if (!options.dry_run) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

double relative_frobenius(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& ref) {
    const double n = ref.norm();
    return n == 0.0 ? 0.0 : (approx - ref).norm() / n;
}

// Problem used for solves, built once per command.
PdeProblem problem_of(const RunConfig& config) { return config.problem.build(); }

}  // namespace

fs::path resolve_output(const RunConfig& config, const CommandOptions& options) {
    if (!options.out.empty()) return options.out;
    if (const char* env = std::getenv("LASDI_OUT"); env && *env) return fs::path(env);
    if (!config.output.empty()) return config.output;
    return fs::path("runs") / (config.name.empty() ? std::string("run") : config.name);
}

StageReport cmd_gen_fom(const RunConfig& config, const CommandOptions& options) {
    config.validate();
    auto& log = log_of(options);
    const fs::path dir = prepare_dir(config, options);
    RunManifest manifest = RunManifest::load(dir);
    const std::string key = gen_key(config);
    StageReport report{"gen-fom"};
    const auto points = config.train.expand();

    if (manifest.up_to_date(dir, "gen-fom", key)) {
        log << "gen-fom: up to date (" << points.size() << " trajectories)\n";
        return report;
    }
    if (options.dry_run) {
        log << "gen-fom: would solve " << points.size() << " training points into " << (dir / artifacts::snapshots)
            << '\n';
        return report;
    }

    const PdeProblem problem = problem_of(config);
    const auto t0 = Clock::now();
    std::vector<StateTrajectory> trajectories(points.size());
    std::vector<std::string> failures(points.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                trajectories[i] = solve_fom(problem, points[i]);
            } catch (const Error& e) {
                failures[i] = e.what();
            }
            std::lock_guard lock(log_mutex);
            log << "gen-fom: point " << (i + 1) << "/" << points.size() << " (" << point_label(points[i]) << ")"
                << (failures[i].empty() ? "" : " FAILED") << '\n';
        }
    };
    const std::size_t jobs = std::min(job_count(options), std::max<std::size_t>(1, points.size()));
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    std::size_t failed = 0;
    std::string first;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (failures[i].empty()) continue;
        ++failed;
        std::cerr << "gen-fom: " << point_label(points[i]) << ": " << failures[i] << '\n';
        if (first.empty()) first = point_label(points[i]) + ": " + failures[i];
    }
    if (failed > 0) {
        throw StageFailure(std::to_string(failed) + " of " + std::to_string(points.size()) +
                           " training solves failed; first: " + first);
    }

    SnapshotMeta meta{problem.kind, problem.grid, problem.time.dt};
    const SnapshotMatrix s = assemble(trajectories, meta);
    save(s, dir / artifacts::snapshots);
    report.ran = true;
    report.seconds = seconds_since(t0);
    record(manifest, dir, "gen-fom", key, report.seconds, {artifacts::snapshots},
           {{"trajectories", static_cast<double>(points.size())},
            {"mean_fom_seconds", report.seconds / static_cast<double>(points.size())}});
    log << "gen-fom: wrote " << s.n_rows() << "x" << s.data().cols() << " snapshot matrix in "
        << text::format_double(report.seconds) << " s\n";
    return report;
}

StageReport cmd_compress(const RunConfig& config, const CommandOptions& options) {
    config.validate();
    auto& log = log_of(options);
    const fs::path dir = prepare_dir(config, options);
    RunManifest manifest = RunManifest::load(dir);
    StageReport report{"compress"};
    const std::string snap_hash = recorded_hash(manifest, "gen-fom", artifacts::snapshots);
    if (options.dry_run) {
        const bool fresh = !snap_hash.empty() && manifest.up_to_date(dir, "compress", compress_key(config, snap_hash));
        log << "compress: " << (fresh ? "up to date" : "would build " + compressor_file(config) + " and latent data")
            << '\n';
        return report;
    }
    manifest.verify_artifact(dir, "gen-fom", artifacts::snapshots);
    const std::string key = compress_key(config, snap_hash);
    if (manifest.up_to_date(dir, "compress", key)) {
        log << "compress: up to date\n";
        return report;
    }

    const auto t0 = Clock::now();
    const SnapshotMatrix s = load_snapshots(dir / artifacts::snapshots);
    std::map<std::string, double> metrics;
    const std::size_t n_s = config.compressor.latent_dim;

    // Singular values of the snapshot matrix are reported for both compressor kinds.
    PodBasis pod = compute_pod(s, config.compressor.type == CompressorConfig::Type::pod ? n_s : 1);
    {
        std::ofstream out(dir / artifacts::singular_values);
        if (!out) throw IoError("cannot write " + (dir / artifacts::singular_values).string());
        out << "index,sigma,mass\n";
        for (Eigen::Index i = 0; i < pod.singular_values.size(); ++i) {
            out << (i + 1) << ',' << text::format_double(pod.singular_values[i]) << ','
                << text::format_double(singular_value_mass(pod, static_cast<std::size_t>(i + 1))) << '\n';
        }
    }

    std::optional<Compressor> compressor;
    if (config.compressor.type == CompressorConfig::Type::pod) {
        metrics["m_sv"] = singular_value_mass(pod, n_s);
        compressor.emplace(std::move(pod));
    } else {
        AutoencoderConfig cfg = config.compressor.autoencoder;
        cfg.latent_dim = n_s;
        log << "compress: training autoencoder (" << cfg.epochs << " epochs, seed " << cfg.seed << ")\n";
        Autoencoder ae = train_autoencoder(s.data(), s.meta().grid, cfg);
        metrics["initial_mse"] = ae.record.initial_mse;
        metrics["final_mse"] = ae.record.final_mse;
        compressor.emplace(std::move(ae));
    }
    const std::string model_file = compressor_file(config);
    compressor->save(dir / model_file);
    const LatentSnapshotMatrix latent = encode_snapshots(*compressor, s);
    save(latent, dir / artifacts::latent);
    metrics["projection_error"] = relative_frobenius(compressor->decode(latent.data()), s.data());

    report.ran = true;
    report.seconds = seconds_since(t0);
    record(manifest, dir, "compress", key, report.seconds, {model_file, artifacts::latent, artifacts::singular_values},
           metrics);
    log << "compress: " << model_file << ", latent dimension " << n_s;
    if (metrics.contains("m_sv")) log << ", m_sv " << text::format_double(metrics["m_sv"]);
    log << ", projection error " << text::format_double(metrics["projection_error"]) << '\n';
    return report;
}

StageReport cmd_fit(const RunConfig& config, const CommandOptions& options) {
    config.validate();
    auto& log = log_of(options);
    const fs::path dir = prepare_dir(config, options);
    RunManifest manifest = RunManifest::load(dir);
    StageReport report{"fit"};
    const std::string latent_hash = recorded_hash(manifest, "compress", artifacts::latent);
    if (options.dry_run) {
        const bool fresh = !latent_hash.empty() && manifest.up_to_date(dir, "fit", fit_key(config, latent_hash));
        log << "fit: " << (fresh ? "up to date" : "would identify latent dynamics") << '\n';
        return report;
    }
    manifest.verify_artifact(dir, "compress", artifacts::latent);
    const std::string key = fit_key(config, latent_hash);
    if (manifest.up_to_date(dir, "fit", key)) {
        log << "fit: up to date\n";
        return report;
    }

    const auto t0 = Clock::now();
    const LatentSnapshotMatrix latent = load_latent(dir / artifacts::latent);
    const double dt = latent.meta().dt > 0.0 ? latent.meta().dt : problem_of(config).time.dt;
    LibrarySpec spec = config.library;
    spec.latent_dim = latent.n_rows();
    const std::size_t warnings_before = diag::warning_count();
    const DiEnsemble ensemble = DiEnsemble::fit(latent, spec, dt, config.strategy, config.rescale);
    ensemble.save(dir / artifacts::ensemble);
    const std::string text = ensemble.dump();
    {
        std::ofstream out(dir / artifacts::equations);
        if (!out) throw IoError("cannot write " + (dir / artifacts::equations).string());
        out << text;
    }
    report.ran = true;
    report.seconds = seconds_since(t0);
    record(manifest, dir, "fit", key, report.seconds, {artifacts::ensemble, artifacts::equations},
           {{"warnings", static_cast<double>(diag::warning_count() - warnings_before)}});
    log << text;
    return report;
}

StageReport cmd_evaluate(const RunConfig& config, const CommandOptions& options) {
    config.validate();
    auto& log = log_of(options);
    const fs::path dir = prepare_dir(config, options);
    RunManifest manifest = RunManifest::load(dir);
    StageReport report{"evaluate"};
    const std::string model_file = compressor_file(config);
    const std::string model_hash = recorded_hash(manifest, "compress", model_file);
    const std::string ens_hash = recorded_hash(manifest, "fit", artifacts::ensemble);
    const auto points = config.test.expand();
    if (options.dry_run) {
        const bool fresh = !model_hash.empty() && !ens_hash.empty() &&
                           manifest.up_to_date(dir, "evaluate", evaluate_key(config, model_hash, ens_hash));
        log << "evaluate: " << (fresh ? "up to date" : "would sweep " + std::to_string(points.size()) + " test points")
            << '\n';
        return report;
    }
    manifest.verify_artifact(dir, "compress", model_file);
    manifest.verify_artifact(dir, "fit", artifacts::ensemble);
    const std::string key = evaluate_key(config, model_hash, ens_hash);
    if (manifest.up_to_date(dir, "evaluate", key)) {
        log << "evaluate: up to date\n";
        return report;
    }

    const auto t0 = Clock::now();
    const PdeProblem problem = problem_of(config);
    const Compressor compressor = Compressor::load(dir / model_file);
    const DiEnsemble ensemble = DiEnsemble::load(dir / artifacts::ensemble);
    EvalOptions opt;
    opt.ode = config.ode;
    opt.jobs = job_count(options);
    opt.timing = config.evaluate.timing;
    opt.timing_samples = config.evaluate.timing_samples;
    opt.check_lower_bound = config.evaluate.lower_bound;
    const std::string model_name = config.name.empty() ? std::string("lasdi") : config.name;
    log << "evaluate: " << points.size() << " test points\n";
    const Evaluation eval = evaluate_testset({EvalModel{model_name, &compressor, &ensemble}}, problem, points, opt);

    const auto& names = problem.domain.names;
    write_heatmap_csv(eval.errors.front(), names, dir / artifacts::heatmap);
    write_points_csv(eval, names, dir / artifacts::errors);
    write_summary_csv(eval, dir / artifacts::summary);

    const auto& r = eval.errors.front();
    std::map<std::string, double> metrics{{"points", static_cast<double>(points.size())},
                                          {"failed", static_cast<double>(r.failed)}};
    if (r.argmax() != ErrorReport::npos) {
        metrics["max_error"] = r.max_error();
        metrics["min_error"] = r.min_error();
        log << "evaluate: max error " << text::format_double(r.max_error()) << " at ("
            << point_label(r.points[r.argmax()]) << "), min error " << text::format_double(r.min_error()) << " at ("
            << point_label(r.points[r.argmin()]) << ")\n";
    }
    if (!eval.speedups.empty() && eval.speedups.front().samples > 0) {
        metrics["speedup"] = eval.speedups.front().ratio();
        log << "evaluate: speedup " << text::format_double(eval.speedups.front().ratio()) << "x\n";
    }
    if (!eval.lower_bounds.empty() && eval.lower_bounds.front().trajectories > 0) {
        metrics["lower_bound_violations"] = static_cast<double>(eval.lower_bounds.front().violations);
    }
    if (r.failed > 0) log << "evaluate: " << r.failed << " points failed (NaN in the CSVs)\n";
    report.ran = true;
    report.seconds = seconds_since(t0);
    record(manifest, dir, "evaluate", key, report.seconds, {artifacts::heatmap, artifacts::errors, artifacts::summary},
           metrics);
    return report;
}

PredictReport cmd_predict(const RunConfig& config, const CommandOptions& options, const ParameterPoint& point,
                          bool with_reference) {
    config.validate();
    auto& log = log_of(options);
    const fs::path dir = resolve_output(config, options);
    const PdeProblem problem = problem_of(config);
    if (point.size() != problem.domain.dimension()) {
        throw ConfigError("predict: point has " + std::to_string(point.size()) + " components, the parameter space has " +
                          std::to_string(problem.domain.dimension()));
    }
    RunManifest manifest = RunManifest::load(dir);
    const std::string model_file = compressor_file(config);
    manifest.verify_artifact(dir, "compress", model_file);
    manifest.verify_artifact(dir, "fit", artifacts::ensemble);

    PredictReport out;
    out.outside_domain = !problem.domain.contains(point);
    if (out.outside_domain) {
        diag::warn("predict: (" + point_label(point) + ") lies outside the parameter domain; extrapolating");
    }
    const std::string label = point_label(point);
    out.trajectory = dir / ("predict_" + label + ".lsnap");
    out.profile = dir / ("profile_" + label + ".csv");
    out.latent = dir / ("latent_" + label + ".csv");
    if (with_reference) out.steps = dir / ("steps_" + label + ".csv");
    if (options.dry_run) {
        log << "predict: would write " << out.trajectory << ", " << out.profile << " and " << out.latent << '\n';
        return out;
    }

    const Compressor compressor = Compressor::load(dir / model_file);
    const DiEnsemble ensemble = DiEnsemble::load(dir / artifacts::ensemble);
    const auto pred = predict(compressor, ensemble, problem, point, config.ode, DomainCheck::allow_outside);
    save(SnapshotMatrix(pred.states, {point}, problem.time.n_steps, SnapshotMeta{problem.kind, problem.grid, problem.time.dt}),
         out.trajectory);

    std::optional<StateTrajectory> reference;
    if (with_reference) {
        reference = solve_fom(problem, point, DomainCheck::allow_outside);
        out.error = max_relative_error(pred.states, reference->states);
    }

    std::ofstream csv(out.profile);
    if (!csv) throw IoError("cannot write " + out.profile.string());
    const auto& grid = problem.grid;
    static constexpr std::array<const char*, 2> coord_names{"x", "y"};
    for (std::size_t d = 0; d < grid.dimension(); ++d) csv << coord_names[d] << ',';
    csv << "component,predicted";
    if (reference) csv << ",reference";
    csv << '\n';
    const auto last = pred.states.cols() - 1;
    for (std::size_t c = 0; c < grid.components; ++c) {
        for (std::size_t node = 0; node < grid.node_count(); ++node) {
            const auto dof = static_cast<Eigen::Index>(c * grid.node_count() + node);
            for (double x : grid.node_coordinates(node)) csv << text::format_double(x) << ',';
            csv << c << ',' << text::format_double(pred.states(dof, last));
            if (reference) csv << ',' << text::format_double(reference->states(dof, last));
            csv << '\n';
        }
    }
    csv.close();

    std::ofstream lat(out.latent);
    if (!lat) throw IoError("cannot write " + out.latent.string());
    lat << 't';
    for (Eigen::Index i = 0; i < pred.latent.rows(); ++i) lat << ",z" << i + 1;
    lat << '\n';
    for (Eigen::Index n = 0; n < pred.latent.cols(); ++n) {
        lat << text::format_double(problem.time.time(static_cast<std::size_t>(n)));
        for (Eigen::Index i = 0; i < pred.latent.rows(); ++i) lat << ',' << text::format_double(pred.latent(i, n));
        lat << '\n';
    }
    lat.close();

    std::vector<std::string> written{out.trajectory.filename().string(), out.profile.filename().string(),
                                     out.latent.filename().string()};
    if (reference) {
        // Per-step errors next to the POD projection error, which bounds them from below.
        std::ofstream st(out.steps);
        if (!st) throw IoError("cannot write " + out.steps.string());
        const bool pod = compressor.is_pod();
        st << "t,error" << (pod ? ",projection" : "") << '\n';
        const auto errs = relative_errors(pred.states, reference->states);
        for (std::size_t n = 1; n <= errs.size(); ++n) {
            const auto col = static_cast<Eigen::Index>(n);
            st << text::format_double(problem.time.time(n)) << ',' << text::format_double(errs[n - 1]);
            if (pod) {
                const auto& phi = compressor.pod().basis;
                const Eigen::VectorXd r = reference->states.col(col);
                const Eigen::VectorXd proj = phi * (phi.transpose() * r);
                st << ',' << text::format_double((proj - r).norm() / r.norm());
            }
            st << '\n';
        }
        st.close();
        written.push_back(out.steps.filename().string());
    }

    record(manifest, dir, "predict", stage_key({label}), 0.0, written,
           out.error ? std::map<std::string, double>{{"error", *out.error}} : std::map<std::string, double>{});
    log << "predict: (" << label << ") -> " << out.trajectory.filename().string();
    if (out.error) log << ", max relative error " << text::format_double(*out.error);
    log << '\n';
    return out;
}

std::vector<StageReport> cmd_pipeline(const RunConfig& config, const CommandOptions& options) {
    config.validate();
    std::vector<StageReport> reports;
    if (options.dry_run) log_of(options) << "pipeline plan for " << resolve_output(config, options) << ":\n";
    reports.push_back(cmd_gen_fom(config, options));
    reports.push_back(cmd_compress(config, options));
    reports.push_back(cmd_fit(config, options));
    reports.push_back(cmd_evaluate(config, options));
    return reports;
}

std::string describe_artifact(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    const std::string tag(magic.data(), static_cast<std::size_t>(in.gcount()));
    in.close();
    std::ostringstream out;
    auto describe_blocks = [&](const auto& m, const char* what) {
        out << what << ": " << m.n_rows() << " rows, " << m.n_param() << " blocks of " << m.block_width()
            << " columns\n";
        if (m.meta().kind) out << "problem: " << to_string(*m.meta().kind) << '\n';
        if (m.meta().dt > 0.0) out << "dt: " << text::format_double(m.meta().dt) << '\n';
        out << "parameters:";
        for (const auto& p : m.params()) out << " (" << point_label(p) << ")";
        out << '\n';
    };
    if (tag == "LASDISNP") {
        describe_blocks(load_snapshots(path), "snapshot matrix");
    } else if (tag == "LASDILAT") {
        describe_blocks(load_latent(path), "latent snapshot matrix");
    } else if (tag == "LASDIPOD") {
        const PodBasis pod = load_pod(path);
        out << "POD basis: " << pod.full_dim() << " x " << pod.latent_dim() << ", rank " << pod.rank() << '\n';
        out << "m_sv: " << text::format_double(singular_value_mass(pod, pod.latent_dim())) << '\n';
        out << "leading singular values:";
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(pod.singular_values.size(), 10); ++i) {
            out << ' ' << text::format_double(pod.singular_values[i]);
        }
        out << '\n';
    } else if (tag == "LASDIAEN") {
        const Autoencoder ae = load_autoencoder(path);
        out << "autoencoder: " << ae.full_dim() << " -> " << ae.enc_w1.rows() << " -> " << ae.latent_dim() << " -> "
            << ae.dec_w1.rows() << " -> " << ae.full_dim() << " (" << to_string(ae.activation) << ")\n";
        out << "parameters: " << ae.parameter_count() << ", masked decoder entries: " << ae.dec_w2.nonZeros() << '\n';
        out << "training: " << ae.record.epochs << " epochs, seed " << ae.record.seed << ", mse "
            << text::format_double(ae.record.initial_mse) << " -> " << text::format_double(ae.record.final_mse)
            << '\n';
    } else if (tag == "LASDIDIM") {
        out << DiEnsemble::load(path).dump();
    } else {
        std::ifstream text_in(path);
        std::stringstream ss;
        ss << text_in.rdbuf();
        try {
            out << nlohmann::json::parse(ss.str()).dump(2) << '\n';
        } catch (const nlohmann::json::exception&) {
            throw FormatError("'" + path.string() + "' is neither a known artifact nor JSON");
        }
    }
    return out.str();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RankError*>(&e) ||
        dynamic_cast<const GridError*>(&e) || dynamic_cast<const DuplicateError*>(&e)) {
        return 1;
    }
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const NonFiniteError*>(&e)) {
        return 3;
    }
    return 2;
}

}  // namespace lasdi::app
