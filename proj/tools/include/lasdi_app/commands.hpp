#pragma once

#include "lasdi_app/config.hpp"
#include "lasdi_app/manifest.hpp"

#include <cstddef>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lasdi::app {

/// A stage could not finish (solver divergence, training failure). Exit code 2.
class StageFailure : public Error {
public:
    using Error::Error;
};

struct CommandOptions {
    std::filesystem::path out;  ///< empty: LASDI_OUT, then config.output, then runs/<name>
    std::size_t jobs = 1;
    bool deterministic = false;  ///< forces jobs = 1
    bool dry_run = false;
    std::ostream* log = nullptr;  ///< progress text; null selects std::cout
};

/// Output directory chosen by the precedence documented on CommandOptions::out.
std::filesystem::path resolve_output(const RunConfig& config, const CommandOptions& options);

/// File names inside a run directory.
namespace artifacts {
inline constexpr const char* snapshots = "snapshots.lsnap";
inline constexpr const char* pod = "compressor.lpod";
inline constexpr const char* autoencoder = "compressor.lae";
inline constexpr const char* latent = "latent.llat";
inline constexpr const char* singular_values = "singular_values.csv";
inline constexpr const char* ensemble = "ensemble.ldim";
inline constexpr const char* equations = "equations.txt";
inline constexpr const char* heatmap = "heatmap.csv";
inline constexpr const char* errors = "errors.csv";
inline constexpr const char* summary = "summary.csv";
}  // namespace artifacts

/// Stage outcome as reported to the user.
struct StageReport {
    std::string stage;
    bool ran = false;  ///< false when the cached artifacts were reused or on a dry run
    double seconds = 0.0;
};

/// Solves every training point and writes the assembled snapshot matrix.
/// Throws StageFailure after reporting every failed point.
StageReport cmd_gen_fom(const RunConfig& config, const CommandOptions& options);

/// POD or autoencoder, latent snapshots and the singular value CSV.
StageReport cmd_compress(const RunConfig& config, const CommandOptions& options);

/// Dynamics identification; writes the ensemble and its readable equations.
StageReport cmd_fit(const RunConfig& config, const CommandOptions& options);

/// Sweeps the test set; writes heat-map, per-point and summary CSVs.
StageReport cmd_evaluate(const RunConfig& config, const CommandOptions& options);

struct PredictReport {
    std::filesystem::path trajectory;  ///< .lsnap holding the predicted states
    std::filesystem::path profile;     ///< final-time CSV
    std::filesystem::path latent;      ///< latent trajectory CSV (t, z1..zn)
    std::filesystem::path steps;       ///< per-step errors, only with a reference
    std::optional<double> error;       ///< max relative error when a reference was solved
    bool outside_domain = false;
};

/// Predicts at `point`. Points outside the parameter domain produce a warning
/// and are still attempted.
PredictReport cmd_predict(const RunConfig& config, const CommandOptions& options, const ParameterPoint& point,
                          bool with_reference);

/// gen-fom, compress, fit and evaluate in order, stopping at the first failure.
std::vector<StageReport> cmd_pipeline(const RunConfig& config, const CommandOptions& options);

/// Readable summary of an artifact (.lsnap, .llat, .lpod, .lae, .ldim) or JSON file.
std::string describe_artifact(const std::filesystem::path& path);

/// 0 success, 1 configuration error, 2 solver or training failure, 3 I/O error.
int exit_code_for(const std::exception& e);

}  // namespace lasdi::app
