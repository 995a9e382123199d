#include "lasdi_app/config.hpp"

#include "lasdi/interpolation.hpp"
#include "lasdi/library.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace lasdi::app {

using nlohmann::json;

namespace {

double round12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

template <class T>
T get(const json& j, std::string_view where, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + ": wrong type");
    }
}

template <class T>
std::optional<T> get_opt(const json& j, std::string_view where, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return get<T>(j, where, key, T{});
}

json points_json(const std::vector<ParameterPoint>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(p.values);
    return a;
}

std::vector<ParameterPoint> parse_points(const json& j, std::string_view where) {
    if (!j.is_array()) throw ConfigError(std::string(where) + ": expected an array of points");
    std::vector<ParameterPoint> out;
    for (const auto& p : j) {
        if (p.is_number()) {
            out.push_back(ParameterPoint{{p.get<double>()}});
        } else if (p.is_array()) {
            try {
                out.push_back(ParameterPoint{p.get<std::vector<double>>()});
            } catch (const json::exception&) {
                throw ConfigError(std::string(where) + ": points must hold numbers");
            }
        } else {
            throw ConfigError(std::string(where) + ": points must be numbers or arrays");
        }
    }
    return out;
}

json set_json(const ParameterSet& s) {
    json j = json::object();
    if (!s.grid.empty()) {
        json g = json::array();
        for (const auto& r : s.grid) g.push_back({{"start", r.start}, {"stop", r.stop}, {"step", r.step}});
        j["grid"] = g;
    }
    if (!s.points.empty()) j["points"] = points_json(s.points);
    return j;
}

ParameterSet parse_set(const json& j, std::string_view where) {
    reject_unknown(j, where, {"grid", "points"});
    ParameterSet s;
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (!g.is_array()) throw ConfigError(std::string(where) + ".grid: expected an array of ranges");
        for (const auto& r : g) {
            const std::string w = std::string(where) + ".grid";
            reject_unknown(r, w, {"start", "stop", "step"});
            if (!r.contains("start") || !r.contains("stop") || !r.contains("step")) {
                throw ConfigError(w + ": each range needs start, stop and step");
            }
            s.grid.push_back(Range{get<double>(r, w, "start", 0.0), get<double>(r, w, "stop", 0.0),
                                   get<double>(r, w, "step", 0.0)});
        }
    }
    if (j.contains("points")) s.points = parse_points(j.at("points"), std::string(where) + ".points");
    if (!s.grid.empty() && !s.points.empty()) {
        throw ConfigError(std::string(where) + ": give either grid or points, not both");
    }
    return s;
}

json problem_json(const ProblemConfig& p) {
    json j = {{"kind", std::string(to_string(p.kind))}};
    if (!p.nodes.empty()) j["nodes"] = p.nodes;
    if (p.dt) j["dt"] = *p.dt;
    if (p.n_steps) j["n_steps"] = *p.n_steps;
    if (p.viscosity) j["viscosity"] = *p.viscosity;
    if (p.newton_tolerance) j["newton_tolerance"] = *p.newton_tolerance;
    if (p.newton_max_iterations) j["newton_max_iterations"] = *p.newton_max_iterations;
    if (p.linear_tolerance) j["linear_tolerance"] = *p.linear_tolerance;
    return j;
}

ProblemConfig parse_problem(const json& j) {
    const char* w = "problem";
    reject_unknown(j, w, {"kind", "nodes", "dt", "n_steps", "viscosity", "newton_tolerance",
                          "newton_max_iterations", "linear_tolerance"});
    ProblemConfig p;
    if (!j.contains("kind")) throw ConfigError("problem.kind is required");
    try {
        p.kind = parse_problem_kind(get<std::string>(j, w, "kind", ""));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("problem.kind: ") + e.what());
    }
    p.nodes = get<std::vector<std::size_t>>(j, w, "nodes", {});
    p.dt = get_opt<double>(j, w, "dt");
    p.n_steps = get_opt<std::size_t>(j, w, "n_steps");
    p.viscosity = get_opt<double>(j, w, "viscosity");
    p.newton_tolerance = get_opt<double>(j, w, "newton_tolerance");
    p.newton_max_iterations = get_opt<int>(j, w, "newton_max_iterations");
    p.linear_tolerance = get_opt<double>(j, w, "linear_tolerance");
    return p;
}

json compressor_json(const CompressorConfig& c) {
    if (c.type == CompressorConfig::Type::pod) return {{"type", "pod"}, {"latent_dim", c.latent_dim}};
    const auto& a = c.autoencoder;
    return {{"type", "autoencoder"},
            {"latent_dim", c.latent_dim},
            {"hidden_width", a.hidden_width},
            {"encoder_width", a.encoder_width},
            {"activation", std::string(to_string(a.activation))},
            {"epochs", a.epochs},
            {"learning_rate", a.learning_rate},
            {"batch_size", a.batch_size},
            {"train_stride", a.train_stride},
            {"seed", a.seed},
            {"minmax_scaling", a.minmax_scaling}};
}

CompressorConfig parse_compressor(const json& j) {
    const char* w = "compressor";
    reject_unknown(j, w, {"type", "latent_dim", "hidden_width", "encoder_width", "activation", "epochs",
                          "learning_rate", "batch_size", "train_stride", "seed", "minmax_scaling"});
    CompressorConfig c;
    const auto type = get<std::string>(j, w, "type", "pod");
    if (type == "pod") {
        c.type = CompressorConfig::Type::pod;
        for (const char* k : {"hidden_width", "encoder_width", "activation", "epochs", "learning_rate", "batch_size",
                              "train_stride", "seed", "minmax_scaling"}) {
            if (j.contains(k)) throw ConfigError(std::string("compressor.") + k + " applies to autoencoders only");
        }
    } else if (type == "autoencoder") {
        c.type = CompressorConfig::Type::autoencoder;
    } else {
        throw ConfigError("compressor.type must be 'pod' or 'autoencoder', got '" + type + "'");
    }
    c.latent_dim = get<std::size_t>(j, w, "latent_dim", c.latent_dim);
    auto& a = c.autoencoder;
    a.hidden_width = get<std::size_t>(j, w, "hidden_width", a.hidden_width);
    a.encoder_width = get<std::size_t>(j, w, "encoder_width", a.encoder_width);
    try {
        a.activation = parse_activation(get<std::string>(j, w, "activation", std::string(to_string(a.activation))));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("compressor.activation: ") + e.what());
    }
    a.epochs = get<std::size_t>(j, w, "epochs", a.epochs);
    a.learning_rate = get<double>(j, w, "learning_rate", a.learning_rate);
    a.batch_size = get<std::size_t>(j, w, "batch_size", a.batch_size);
    a.train_stride = get<std::size_t>(j, w, "train_stride", a.train_stride);
    a.seed = get<std::uint64_t>(j, w, "seed", a.seed);
    a.minmax_scaling = get<bool>(j, w, "minmax_scaling", a.minmax_scaling);
    a.latent_dim = c.latent_dim;
    return c;
}

json library_json(const LibrarySpec& s) {
    return {{"degree", s.poly_degree}, {"cross_terms", s.cross_terms}, {"sin", s.include_sin},
            {"cos", s.include_cos},    {"exp", s.include_exp},         {"constant", s.include_constant}};
}

LibrarySpec parse_library(const json& j) {
    const char* w = "library";
    reject_unknown(j, w, {"degree", "cross_terms", "sin", "cos", "exp", "constant"});
    LibrarySpec s;
    s.poly_degree = get<int>(j, w, "degree", s.poly_degree);
    s.cross_terms = get<bool>(j, w, "cross_terms", s.cross_terms);
    s.include_sin = get<bool>(j, w, "sin", s.include_sin);
    s.include_cos = get<bool>(j, w, "cos", s.include_cos);
    s.include_exp = get<bool>(j, w, "exp", s.include_exp);
    s.include_constant = get<bool>(j, w, "constant", s.include_constant);
    return s;
}

json strategy_json(const DiStrategy& s, bool rescale) {
    json j = {{"kind", std::string(to_string(s.kind))}, {"n_di", s.n_di}, {"rescale", rescale}};
    if (s.kind == DiKind::interpolated) j["method"] = std::string(to_string(s.method));
    return j;
}

DiStrategy parse_strategy(const json& j, bool& rescale) {
    const char* w = "strategy";
    reject_unknown(j, w, {"kind", "n_di", "method", "rescale"});
    DiStrategy s;
    try {
        s.kind = parse_di_kind(get<std::string>(j, w, "kind", "global"));
        if (j.contains("method")) s.method = parse_interp_method(get<std::string>(j, w, "method", "rbf"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("strategy: ") + e.what());
    }
    s.n_di = get<std::size_t>(j, w, "n_di", 0);
    rescale = get<bool>(j, w, "rescale", false);
    return s;
}

json ode_json(const OdeSolverConfig& c) {
    return {{"rtol", c.rtol},         {"atol", c.atol},         {"initial_step", c.initial_step},
            {"min_step", c.min_step}, {"max_step", c.max_step}, {"safety", c.safety},
            {"min_factor", c.min_factor}, {"max_factor", c.max_factor}, {"max_steps", c.max_steps}};
}

OdeSolverConfig parse_ode(const json& j) {
    const char* w = "ode";
    reject_unknown(j, w, {"rtol", "atol", "initial_step", "min_step", "max_step", "safety", "min_factor",
                          "max_factor", "max_steps"});
    OdeSolverConfig c;
    c.rtol = get<double>(j, w, "rtol", c.rtol);
    c.atol = get<double>(j, w, "atol", c.atol);
    c.initial_step = get<double>(j, w, "initial_step", c.initial_step);
    c.min_step = get<double>(j, w, "min_step", c.min_step);
    c.max_step = get<double>(j, w, "max_step", c.max_step);
    c.safety = get<double>(j, w, "safety", c.safety);
    c.min_factor = get<double>(j, w, "min_factor", c.min_factor);
    c.max_factor = get<double>(j, w, "max_factor", c.max_factor);
    c.max_steps = get<std::size_t>(j, w, "max_steps", c.max_steps);
    return c;
}

json evaluate_json(const EvaluateConfig& e) {
    return {{"timing", e.timing}, {"timing_samples", e.timing_samples}, {"lower_bound", e.lower_bound}};
}

EvaluateConfig parse_evaluate(const json& j) {
    const char* w = "evaluate";
    reject_unknown(j, w, {"timing", "timing_samples", "lower_bound"});
    EvaluateConfig e;
    e.timing = get<bool>(j, w, "timing", e.timing);
    e.timing_samples = get<std::size_t>(j, w, "timing_samples", e.timing_samples);
    e.lower_bound = get<bool>(j, w, "lower_bound", e.lower_bound);
    return e;
}

json to_json_object(const RunConfig& c) {
    json j;
    j["name"] = c.name;
    j["problem"] = problem_json(c.problem);
    j["train"] = set_json(c.train);
    j["test"] = set_json(c.test);
    j["compressor"] = compressor_json(c.compressor);
    j["library"] = library_json(c.library);
    j["strategy"] = strategy_json(c.strategy, c.rescale);
    j["ode"] = ode_json(c.ode);
    j["evaluate"] = evaluate_json(c.evaluate);
    if (c.showcase) j["showcase"] = c.showcase->values;
    j["output"] = c.output.generic_string();
    return j;
}

bool same_ode(const OdeSolverConfig& a, const OdeSolverConfig& b) {
    return a.rtol == b.rtol && a.atol == b.atol && a.initial_step == b.initial_step && a.min_step == b.min_step &&
           a.max_step == b.max_step && a.safety == b.safety && a.min_factor == b.min_factor &&
           a.max_factor == b.max_factor && a.max_steps == b.max_steps;
}

bool same_strategy(const DiStrategy& a, const DiStrategy& b) {
    // The interpolation method is meaningless unless the kind is interpolated.
    return a.kind == b.kind && a.n_di == b.n_di && (a.kind != DiKind::interpolated || a.method == b.method);
}

}  // namespace

std::vector<double> Range::expand() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
        throw ConfigError("range values must be finite");
    }
    if (step <= 0.0) throw ConfigError("range step must be positive, got " + std::to_string(step));
    if (start > stop) {
        throw ConfigError("range start " + std::to_string(start) + " exceeds stop " + std::to_string(stop));
    }
    // Tolerate representation error in (stop - start) / step.
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = round12(start + static_cast<double>(i) * step);
    return out;
}

std::vector<ParameterPoint> ParameterSet::expand() const {
    if (!points.empty()) return points;
    std::vector<ParameterPoint> out;
    if (grid.empty()) return out;
    std::vector<std::vector<double>> axes;
    for (const auto& r : grid) axes.push_back(r.expand());
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        ParameterPoint p;
        for (std::size_t d = 0; d < axes.size(); ++d) p.values.push_back(axes[d][idx[d]]);
        out.push_back(std::move(p));
        std::size_t d = axes.size();
        while (d > 0) {
            --d;
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
            if (d == 0) return out;
        }
    }
}

PdeProblem ProblemConfig::build() const {
    PdeProblem p = PdeProblem::make(kind);
    if (!nodes.empty()) {
        if (nodes.size() != p.grid.axes.size()) {
            throw ConfigError("problem.nodes has " + std::to_string(nodes.size()) + " entries, " +
                              std::string(to_string(kind)) + " has " + std::to_string(p.grid.axes.size()) +
                              " axes");
        }
        for (std::size_t d = 0; d < nodes.size(); ++d) {
            if (nodes[d] < 3) throw ConfigError("problem.nodes: every axis needs at least 3 nodes");
            p.grid.axes[d].nodes = nodes[d];
        }
    }
    if (dt) {
        if (!(*dt > 0.0)) throw ConfigError("problem.dt must be positive");
        p.time.dt = *dt;
    }
    if (n_steps) {
        if (*n_steps < 2) throw ConfigError("problem.n_steps must be at least 2");
        p.time.n_steps = *n_steps;
    }
    if (viscosity) {
        if (*viscosity < 0.0) throw ConfigError("problem.viscosity must be nonnegative");
        p.viscosity = *viscosity;
    }
    if (newton_tolerance) {
        if (!(*newton_tolerance > 0.0)) throw ConfigError("problem.newton_tolerance must be positive");
        p.newton.tolerance = *newton_tolerance;
    }
    if (newton_max_iterations) {
        if (*newton_max_iterations < 1) throw ConfigError("problem.newton_max_iterations must be at least 1");
        p.newton.max_iterations = *newton_max_iterations;
    }
    if (linear_tolerance) {
        if (!(*linear_tolerance > 0.0)) throw ConfigError("problem.linear_tolerance must be positive");
        p.linear_tolerance = *linear_tolerance;
    }
    return p;
}

bool CompressorConfig::operator==(const CompressorConfig& o) const {
    if (type != o.type || latent_dim != o.latent_dim) return false;
    if (type == Type::pod) return true;
    const auto& a = autoencoder;
    const auto& b = o.autoencoder;
    return a.hidden_width == b.hidden_width && a.encoder_width == b.encoder_width && a.activation == b.activation &&
           a.epochs == b.epochs && a.learning_rate == b.learning_rate && a.batch_size == b.batch_size &&
           a.train_stride == b.train_stride && a.seed == b.seed && a.minmax_scaling == b.minmax_scaling;
}

bool RunConfig::operator==(const RunConfig& o) const {
    return name == o.name && problem == o.problem && train == o.train && test == o.test &&
           compressor == o.compressor && library == o.library && same_strategy(strategy, o.strategy) &&
           rescale == o.rescale && same_ode(ode, o.ode) && evaluate == o.evaluate && showcase == o.showcase &&
           output == o.output;
}

void RunConfig::validate() const {
    const PdeProblem p = problem.build();
    const std::size_t dim = p.domain.dimension();
    auto check_set = [&](const ParameterSet& s, const char* what) {
        for (const auto& r : s.grid) (void)r.expand();
        if (!s.grid.empty() && s.grid.size() != dim) {
            throw ConfigError(std::string(what) + ": grid has " + std::to_string(s.grid.size()) +
                              " axes, the parameter space has " + std::to_string(dim));
        }
        for (const auto& pt : s.points) {
            if (pt.size() != dim) {
                throw ConfigError(std::string(what) + ": point of dimension " + std::to_string(pt.size()) +
                                  ", expected " + std::to_string(dim));
            }
        }
    };
    check_set(train, "train");
    check_set(test, "test");
    const auto pts = train.expand();
    if (pts.empty()) throw ConfigError("train: at least one training point is required");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (pts[i] == pts[j]) throw ConfigError("train: duplicate training point at positions " +
                                                    std::to_string(j) + " and " + std::to_string(i));
        }
    }
    if (compressor.latent_dim == 0) throw ConfigError("compressor.latent_dim must be positive");
    if (library.poly_degree < 0 || library.poly_degree > 5) {
        throw ConfigError("library.degree must lie in 0..5, got " + std::to_string(library.poly_degree));
    }
    if (library_size(library) == 0) throw ConfigError("library: no terms selected");
    if (strategy.kind == DiKind::local && strategy.n_di > pts.size()) {
        throw ConfigError("strategy.n_di = " + std::to_string(strategy.n_di) + " exceeds the " +
                          std::to_string(pts.size()) + " training points");
    }
    if (strategy.kind == DiKind::interpolated && strategy.method == InterpMethod::rbf && pts.size() < 2) {
        throw ConfigError("strategy: RBF interpolation needs at least 2 training points");
    }
    if (strategy.kind == DiKind::interpolated && strategy.method == InterpMethod::bilinear &&
        (dim != 2 || !detect_uniform_grid(pts))) {
        throw ConfigError("strategy: bilinear interpolation requires a uniform 2D training grid");
    }
    try {
        ode.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("ode: ") + e.what());
    }
    if (compressor.type == CompressorConfig::Type::autoencoder) {
        const auto& a = compressor.autoencoder;
        if (a.epochs == 0) throw ConfigError("compressor.epochs must be positive");
        if (!(a.learning_rate > 0.0)) throw ConfigError("compressor.learning_rate must be positive");
        if (a.train_stride == 0) throw ConfigError("compressor.train_stride must be positive");
    }
    if (showcase && showcase->size() != dim) throw ConfigError("showcase: wrong dimension");
}

RunConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    reject_unknown(j, "config", {"name", "problem", "train", "test", "compressor", "library", "strategy", "ode",
                                 "evaluate", "showcase", "output"});
    RunConfig c;
    c.name = get<std::string>(j, "config", "name", "");
    if (!j.contains("problem")) throw ConfigError("config: 'problem' is required");
    c.problem = parse_problem(j.at("problem"));
    if (j.contains("train")) c.train = parse_set(j.at("train"), "train");
    if (j.contains("test")) c.test = parse_set(j.at("test"), "test");
    if (j.contains("compressor")) c.compressor = parse_compressor(j.at("compressor"));
    if (j.contains("library")) c.library = parse_library(j.at("library"));
    c.library.latent_dim = c.compressor.latent_dim;
    if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy"), c.rescale);
    if (j.contains("ode")) c.ode = parse_ode(j.at("ode"));
    if (j.contains("evaluate")) c.evaluate = parse_evaluate(j.at("evaluate"));
    if (j.contains("showcase")) {
        auto pts = parse_points(json::array({j.at("showcase")}), "showcase");
        c.showcase = pts.front();
    }
    c.output = get<std::string>(j, "config", "output", "");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const RunConfig& config, int indent) { return to_json_object(config).dump(indent); }

std::string section_json(const RunConfig& config, std::string_view section) {
    const json j = to_json_object(config);
    const std::string key(section);
    if (!j.contains(key)) return "null";
    return j.at(key).dump();
}

}  // namespace lasdi::app
