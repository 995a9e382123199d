#include "binary_io.hpp"

#include "lasdi/error.hpp"

#include <bit>
#include <cstring>

namespace lasdi::io {
namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::array<unsigned char, sizeof(T)> b{};
        std::memcpy(b.data(), &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }
}

std::string magic_string(const Magic& m) { return std::string(m.data(), m.size()); }

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path, const Magic& magic, std::uint32_t version)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    raw(magic.data(), magic.size());
    u32(version);
}

void BinaryWriter::raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void BinaryWriter::u8(std::uint8_t v) { raw(&v, 1); }
void BinaryWriter::u32(std::uint32_t v) {
    v = to_little(v);
    raw(&v, sizeof v);
}
void BinaryWriter::u64(std::uint64_t v) {
    v = to_little(v);
    raw(&v, sizeof v);
}
void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::f64s(std::span<const double> values) {
    if constexpr (std::endian::native == std::endian::little) {
        raw(values.data(), values.size_bytes());
    } else {
        for (double v : values) f64(v);
    }
}

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
    f64s(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

void BinaryWriter::bytes(std::span<const std::uint8_t> data) { raw(data.data(), data.size()); }

void BinaryWriter::finish() {
    out_.flush();
    if (!out_) throw IoError("write to '" + path_.string() + "' failed");
    out_.close();
}

BinaryReader::BinaryReader(const std::filesystem::path& path, const Magic& magic,
                           std::uint32_t max_version)
    : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path.string() + "' for reading");
    in_.seekg(0, std::ios::end);
    size_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0, std::ios::beg);
    Magic found{};
    if (size_ < found.size() + 4) {
        throw FormatError("'" + path.string() + "' is too short to hold a header");
    }
    raw(found.data(), found.size());
    if (found != magic) {
        throw FormatError("'" + path.string() + "': magic mismatch, expected " + magic_string(magic));
    }
    version_ = u32();
    if (version_ == 0 || version_ > max_version) {
        throw FormatError("'" + path.string() + "': unsupported format version " +
                          std::to_string(version_));
    }
}

void BinaryReader::raw(void* data, std::size_t n) {
    if (n > remaining()) {
        throw FormatError("'" + path_.string() + "' is truncated (needed " + std::to_string(n) +
                          " bytes at offset " + std::to_string(offset_) + ")");
    }
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("read from '" + path_.string() + "' failed");
    offset_ += n;
}

std::uint8_t BinaryReader::u8() {
    std::uint8_t v = 0;
    raw(&v, 1);
    return v;
}
std::uint32_t BinaryReader::u32() {
    std::uint32_t v = 0;
    raw(&v, sizeof v);
    return to_little(v);
}
std::uint64_t BinaryReader::u64() {
    std::uint64_t v = 0;
    raw(&v, sizeof v);
    return to_little(v);
}
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> BinaryReader::f64s(std::size_t n) {
    if (n > remaining() / 8) {
        throw FormatError("'" + path_.string() + "': header dimensions exceed file size");
    }
    std::vector<double> v(n);
    if constexpr (std::endian::native == std::endian::little) {
        raw(v.data(), n * sizeof(double));
    } else {
        for (auto& x : v) x = f64();
    }
    return v;
}

Eigen::MatrixXd BinaryReader::matrix(std::size_t rows, std::size_t cols) {
    if (cols != 0 && rows > remaining() / 8 / cols) {
        throw FormatError("'" + path_.string() + "': header dimensions exceed file size");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if constexpr (std::endian::native == std::endian::little) {
        raw(m.data(), rows * cols * sizeof(double));
    } else {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    }
    return m;
}

std::vector<std::uint8_t> BinaryReader::bytes(std::size_t n) {
    std::vector<std::uint8_t> v(n);
    raw(v.data(), n);
    return v;
}

std::uint64_t BinaryReader::dim(const char* what, std::uint64_t element_size) {
    const std::uint64_t v = u64();
    if (element_size != 0 && v > remaining() / element_size) {
        throw FormatError("'" + path_.string() + "': header field " + what + " = " + std::to_string(v) +
                          " is inconsistent with the file size");
    }
    return v;
}

void BinaryReader::expect_end() {
    if (remaining() != 0) {
        throw FormatError("'" + path_.string() + "': " + std::to_string(remaining()) +
                          " trailing bytes after payload");
    }
}

}  // namespace lasdi::io
