#pragma once

#include "lasdi/autoencoder.hpp"
#include "lasdi/dopri.hpp"
#include "lasdi/ensemble.hpp"
#include "lasdi/error.hpp"
#include "lasdi/fom.hpp"
#include "lasdi/library.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lasdi::app {

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Inclusive range start, start + step, ..., never exceeding stop.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    /// Values are start + i*step rounded to 12 significant digits, so decimal
    /// grids like 0.7, 0.71, ..., 0.9 come out exact.
    /// Throws ConfigError when step <= 0 or start > stop.
    std::vector<double> expand() const;
    bool operator==(const Range&) const = default;
};

/// Either explicit points or a tensor grid of ranges (first axis outermost).
struct ParameterSet {
    std::vector<Range> grid;
    std::vector<ParameterPoint> points;

    std::vector<ParameterPoint> expand() const;
    bool empty() const { return grid.empty() && points.empty(); }
    bool operator==(const ParameterSet&) const = default;
};

/// Problem kind plus optional discretization overrides.
struct ProblemConfig {
    ProblemKind kind = ProblemKind::burgers1d;
    std::vector<std::size_t> nodes;  ///< per axis, empty keeps the default
    std::optional<double> dt;
    std::optional<std::size_t> n_steps;
    std::optional<double> viscosity;
    std::optional<double> newton_tolerance;
    std::optional<int> newton_max_iterations;
    std::optional<double> linear_tolerance;

    /// Default problem with the overrides applied. Throws ConfigError on an
    /// axis-count mismatch or non-positive values.
    PdeProblem build() const;
    bool operator==(const ProblemConfig&) const = default;
};

struct CompressorConfig {
    enum class Type { pod, autoencoder };
    Type type = Type::pod;
    std::size_t latent_dim = 5;
    AutoencoderConfig autoencoder;  ///< latent_dim is kept in sync with the field above

    bool operator==(const CompressorConfig& o) const;
};

struct EvaluateConfig {
    bool timing = true;
    std::size_t timing_samples = 5;
    bool lower_bound = true;
    bool operator==(const EvaluateConfig&) const = default;
};

struct RunConfig {
    std::string name;
    ProblemConfig problem;
    ParameterSet train;
    ParameterSet test;
    CompressorConfig compressor;
    LibrarySpec library;  ///< latent_dim follows compressor.latent_dim
    DiStrategy strategy;
    bool rescale = false;
    OdeSolverConfig ode;
    EvaluateConfig evaluate;
    std::optional<ParameterPoint> showcase;  ///< default point for `predict`
    std::filesystem::path output;

    /// Structural checks that need no solves: ranges, dimensions against the
    /// problem's parameter space, library degree, strategy settings.
    void validate() const;
    bool operator==(const RunConfig& o) const;
};

/// JSON text round trip. Unknown keys are rejected so typos surface early.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config, int indent = 2);

/// Canonical JSON for a named subsection, used as a cache key input.
std::string section_json(const RunConfig& config, std::string_view section);

/// Named presets reproducing the reference experiments.
std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(std::string_view name);

}  // namespace lasdi::app
