#include "lasdi_app/manifest.hpp"

#include "lasdi_app/config.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

namespace lasdi::app {

using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw Error("SHA-256 initialisation failed");
        }
    }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("SHA-256 finalisation failed");
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 0xF];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string_view tool_version() { return LASDI_VERSION; }

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string sha256_text(std::string_view text) {
    Sha256 h;
    h.update(text.data(), text.size());
    return h.hex();
}

RunManifest RunManifest::load(const std::filesystem::path& run_dir) {
    RunManifest m;
    m.tool_version = std::string(lasdi::app::tool_version());
    const auto path = run_dir / kManifestName;
    if (!std::filesystem::exists(path)) return m;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
        m.tool_version = j.at("tool_version").get<std::string>();
        for (const auto& [name, s] : j.at("stages").items()) {
            StageRecord r;
            r.key = s.at("key").get<std::string>();
            r.seconds = s.at("seconds").get<double>();
            r.artifacts = s.at("artifacts").get<std::map<std::string, std::string>>();
            if (s.contains("metrics")) r.metrics = s.at("metrics").get<std::map<std::string, double>>();
            m.stages[name] = std::move(r);
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest '" + path.string() + "': " + e.what());
    }
    return m;
}

void RunManifest::save(const std::filesystem::path& run_dir) const {
    json j;
    j["tool_version"] = tool_version;
    j["stages"] = json::object();
    for (const auto& [name, r] : stages) {
        j["stages"][name] = {{"key", r.key}, {"seconds", r.seconds}, {"artifacts", r.artifacts}, {"metrics", r.metrics}};
    }
    const auto path = run_dir / kManifestName;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

bool RunManifest::up_to_date(const std::filesystem::path& run_dir, const std::string& stage,
                             const std::string& key) const {
    const auto it = stages.find(stage);
    if (it == stages.end() || it->second.key != key) return false;
    for (const auto& [file, hash] : it->second.artifacts) {
        const auto path = run_dir / file;
        if (!std::filesystem::exists(path)) return false;
        if (sha256_file(path) != hash) {
            throw HashMismatchError("artifact '" + path.string() + "' does not match the hash recorded by stage '" +
                                        stage + "'",
                                    path);
        }
    }
    return true;
}

void RunManifest::verify_artifact(const std::filesystem::path& run_dir, const std::string& stage,
                                  const std::string& file) const {
    const auto path = run_dir / file;
    const auto it = stages.find(stage);
    if (it == stages.end() || !it->second.artifacts.contains(file)) {
        throw ConfigError("'" + path.string() + "' has not been produced; run the '" + stage + "' stage first");
    }
    if (!std::filesystem::exists(path)) {
        throw IoError("'" + path.string() + "' recorded by stage '" + stage + "' is missing");
    }
    if (sha256_file(path) != it->second.artifacts.at(file)) {
        throw HashMismatchError("artifact '" + path.string() + "' does not match the hash recorded by stage '" +
                                    stage + "'",
                                path);
    }
}

}  // namespace lasdi::app
