#pragma once

// Little-endian binary encoding shared by the .lsnap/.lpod/.lae/.ldim formats.
// Every file starts with an 8-byte magic followed by a u32 format version.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace lasdi::io {

using Magic = std::array<char, 8>;

class BinaryWriter {
public:
    BinaryWriter(const std::filesystem::path& path, const Magic& magic, std::uint32_t version);

    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64s(std::span<const double> values);
    void matrix(const Eigen::MatrixXd& m);  ///< column-major payload, no dims
    void bytes(std::span<const std::uint8_t> data);

    /// Flushes and throws IoError if any write failed.
    void finish();

private:
    void raw(const void* data, std::size_t n);

    std::filesystem::path path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    /// Opens `path` and validates magic and version (<= max_version).
    BinaryReader(const std::filesystem::path& path, const Magic& magic, std::uint32_t max_version);

    std::uint32_t version() const { return version_; }

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::vector<double> f64s(std::size_t n);
    Eigen::MatrixXd matrix(std::size_t rows, std::size_t cols);
    std::vector<std::uint8_t> bytes(std::size_t n);

    /// A dimension read from the header that must fit in the remaining bytes
    /// when multiplied by `element_size`. Guards allocations against corrupt headers.
    std::uint64_t dim(const char* what, std::uint64_t element_size = 8);

    std::uint64_t remaining() const { return size_ - offset_; }
    /// Throws FormatError if unread bytes remain.
    void expect_end();

private:
    void raw(void* data, std::size_t n);

    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t size_ = 0;
    std::uint64_t offset_ = 0;
    std::uint32_t version_ = 0;
};

}  // namespace lasdi::io
