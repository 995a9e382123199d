#pragma once

#include "lasdi/error.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace lasdi::app {

/// An artifact on disk no longer matches the hash recorded when it was written.
class HashMismatchError : public IoError {
public:
    HashMismatchError(const std::string& what, std::filesystem::path file)
        : IoError(what), file_(std::move(file)) {}
    const std::filesystem::path& file() const noexcept { return file_; }

private:
    std::filesystem::path file_;
};

/// Lower-case hex SHA-256 of a file or a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_text(std::string_view text);

struct StageRecord {
    std::string key;  ///< hash of the stage inputs
    double seconds = 0.0;
    std::map<std::string, std::string> artifacts;  ///< file name (relative to the run dir) -> hash
    std::map<std::string, double> metrics;

    bool operator==(const StageRecord&) const = default;
};

/// Per-run record of what each stage produced, kept as manifest.json in the
/// output directory.
struct RunManifest {
    std::string tool_version;
    std::map<std::string, StageRecord> stages;

    static RunManifest load(const std::filesystem::path& run_dir);
    void save(const std::filesystem::path& run_dir) const;

    /// True if `stage` was recorded with `key` and every artifact is present.
    /// Throws HashMismatchError naming the first artifact whose content changed.
    bool up_to_date(const std::filesystem::path& run_dir, const std::string& stage, const std::string& key) const;

    /// Re-hashes one artifact recorded by `stage` before it is consumed.
    /// Throws ConfigError when the stage never produced it, IoError when the file
    /// is gone and HashMismatchError on a mismatch.
    void verify_artifact(const std::filesystem::path& run_dir, const std::string& stage,
                         const std::string& file) const;

    bool operator==(const RunManifest&) const = default;
};

std::string_view tool_version();

}  // namespace lasdi::app
