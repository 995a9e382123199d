#include "lasdi/snapshot.hpp"

#include "binary_io.hpp"
#include "lasdi/error.hpp"
#include "lasdi/text.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lasdi {

namespace {

constexpr io::Magic kSnapMagic{'L', 'A', 'S', 'D', 'I', 'S', 'N', 'P'};
constexpr io::Magic kLatentMagic{'L', 'A', 'S', 'D', 'I', 'L', 'A', 'T'};
constexpr std::uint32_t kSnapVersion = 1;

template <class Tag>
constexpr const io::Magic& magic_for() {
    if constexpr (std::is_same_v<Tag, LatentTag>) return kLatentMagic;
    else return kSnapMagic;
}

}  // namespace

template <class Tag>
BlockSnapshots<Tag>::BlockSnapshots(Eigen::MatrixXd data, std::vector<ParameterPoint> params,
                                    std::size_t n_time, SnapshotMeta meta)
    : data_(std::move(data)), params_(std::move(params)), n_time_(n_time), meta_(std::move(meta)) {
    const std::size_t expected = params_.size() * (n_time_ + 1);
    if (static_cast<std::size_t>(data_.cols()) != expected) {
        throw ShapeError("snapshot matrix has " + std::to_string(data_.cols()) + " columns, expected " +
                         std::to_string(params_.size()) + " blocks x " + std::to_string(n_time_ + 1) +
                         " = " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (i > 0 && params_[i].size() != params_[0].size()) {
            throw ShapeError("training parameters have differing dimensions");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (params_[i] == params_[j]) {
                throw DuplicateError("training parameter " + std::to_string(i) + " duplicates parameter " +
                                     std::to_string(j));
            }
        }
    }
}

template <class Tag>
typename BlockSnapshots<Tag>::ConstBlock BlockSnapshots<Tag>::block(std::size_t k) const {
    if (k >= params_.size()) {
        throw IndexError("block index " + std::to_string(k) + " out of range for " +
                         std::to_string(params_.size()) + " training points");
    }
    const auto w = static_cast<Eigen::Index>(block_width());
    return data_.middleCols(static_cast<Eigen::Index>(k) * w, w);
}

template <class Tag>
bool BlockSnapshots<Tag>::operator==(const BlockSnapshots& other) const {
    return n_time_ == other.n_time_ && params_ == other.params_ && meta_.kind == other.meta_.kind &&
           meta_.grid == other.meta_.grid && meta_.dt == other.meta_.dt &&
           data_.rows() == other.data_.rows() && data_.cols() == other.data_.cols() && data_ == other.data_;
}

template class BlockSnapshots<FullStateTag>;
template class BlockSnapshots<LatentTag>;

SnapshotMatrix assemble(const std::vector<StateTrajectory>& trajectories, SnapshotMeta meta) {
    if (trajectories.empty()) throw ShapeError("assemble: no trajectories given");
    const auto rows = trajectories.front().states.rows();
    const auto width = trajectories.front().states.cols();
    if (width == 0) throw ShapeError("assemble: trajectories hold no time instants");
    Eigen::MatrixXd data(rows, width * static_cast<Eigen::Index>(trajectories.size()));
    std::vector<ParameterPoint> params;
    params.reserve(trajectories.size());
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
        const auto& t = trajectories[k];
        if (t.states.rows() != rows || t.states.cols() != width) {
            throw ShapeError("assemble: trajectory " + std::to_string(k) + " is " +
                             std::to_string(t.states.rows()) + "x" + std::to_string(t.states.cols()) +
                             ", expected " + std::to_string(rows) + "x" + std::to_string(width));
        }
        data.middleCols(static_cast<Eigen::Index>(k) * width, width) = t.states;
        params.push_back(t.parameter);
    }
    return SnapshotMatrix(std::move(data), std::move(params), static_cast<std::size_t>(width - 1),
                          std::move(meta));
}

namespace {

template <class Tag>
void save_impl(const BlockSnapshots<Tag>& m, const std::filesystem::path& path) {
    io::BinaryWriter w(path, magic_for<Tag>(), kSnapVersion);
    const std::size_t pdim = m.n_param() == 0 ? 0 : m.params().front().size();
    w.u64(m.n_rows());
    w.u64(m.n_time());
    w.u64(m.n_param());
    w.u64(pdim);
    for (const auto& p : m.params()) w.f64s(p.values);
    const auto& meta = m.meta();
    w.f64(meta.dt);
    w.u32(meta.kind ? static_cast<std::uint32_t>(*meta.kind) + 1 : 0);
    w.u64(meta.grid.axes.size());
    for (const auto& a : meta.grid.axes) {
        w.f64(a.lo);
        w.f64(a.hi);
        w.u64(a.nodes);
    }
    w.u64(meta.grid.components);
    w.matrix(m.data());
    w.finish();
}

template <class Tag>
BlockSnapshots<Tag> load_impl(const std::filesystem::path& path) {
    io::BinaryReader r(path, magic_for<Tag>(), kSnapVersion);
    const auto rows = r.dim("N_s", 0);
    const auto n_time = r.dim("N_t", 0);
    const auto n_param = r.dim("n_param", 8);
    const auto pdim = r.dim("param_dim", 0);
    if (n_param != 0 && pdim > r.remaining() / 8 / n_param) {
        throw FormatError("'" + path.string() + "': parameter block exceeds file size");
    }
    std::vector<ParameterPoint> params(n_param);
    for (auto& p : params) p.values = r.f64s(pdim);
    SnapshotMeta meta;
    meta.dt = r.f64();
    const auto kind = r.u32();
    if (kind > 4) throw FormatError("'" + path.string() + "': unknown problem kind code " + std::to_string(kind));
    if (kind > 0) meta.kind = static_cast<ProblemKind>(kind - 1);
    const auto n_axes = r.dim("axes", 24);
    for (std::uint64_t i = 0; i < n_axes; ++i) {
        Axis a;
        a.lo = r.f64();
        a.hi = r.f64();
        a.nodes = r.u64();
        meta.grid.axes.push_back(a);
    }
    meta.grid.components = r.u64();
    const std::uint64_t cols = n_param * (n_time + 1);
    if (cols != 0 && rows > r.remaining() / 8 / cols) {
        throw FormatError("'" + path.string() + "': header dimensions " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " exceed the payload size");
    }
    if (rows * cols * 8 != r.remaining()) {
        throw FormatError("'" + path.string() + "': payload size does not match header dimensions");
    }
    Eigen::MatrixXd data = r.matrix(rows, cols);
    r.expect_end();
    return BlockSnapshots<Tag>(std::move(data), std::move(params), n_time, std::move(meta));
}

}  // namespace

void save(const SnapshotMatrix& m, const std::filesystem::path& path) { save_impl(m, path); }
void save(const LatentSnapshotMatrix& m, const std::filesystem::path& path) { save_impl(m, path); }
SnapshotMatrix load_snapshots(const std::filesystem::path& path) { return load_impl<FullStateTag>(path); }
LatentSnapshotMatrix load_latent(const std::filesystem::path& path) { return load_impl<LatentTag>(path); }

void write_csv(const Eigen::MatrixXd& data, std::size_t n_time, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::size_t width = n_time + 1;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        if (j > 0) out << ',';
        const auto col = static_cast<std::size_t>(j);
        out << 'k' << col / width << "_t" << col % width;
    }
    out << '\n';
    std::string line;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (j > 0) line += ',';
            line += text::format_double(data(i, j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, ',');
        std::vector<double> values;
        values.reserve(fields.size());
        bool numeric = true;
        for (const auto& f : fields) {
            auto v = text::parse_double(text::trim(f));
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            if (rows.empty() && line_no == 1) continue;  // header
            throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) +
                              ": non-numeric field");
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw ShapeError("'" + path.string() + "' line " + std::to_string(line_no) + " has " +
                             std::to_string(values.size()) + " fields, expected " +
                             std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(values));
    }
    const std::size_t n_cols = rows.empty() ? 0 : rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < n_cols; ++j) {
            const double v = rows[i][j];
            if (!std::isfinite(v)) {
                throw NonFiniteError("'" + path.string() + "': non-finite value at row " + std::to_string(i) +
                                         ", column " + std::to_string(j),
                                     i, j);
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return m;
}

IngestDescriptor read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open descriptor '" + path.string() + "'");
    IngestDescriptor d;
    bool has_space = false, has_time = false, has_param = false, has_params = false;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw FormatError("descriptor '" + path.string() + "' line " + std::to_string(line_no) + ": " + msg);
    };
    auto parse_count = [&](std::string_view v) {
        auto x = text::parse_double(v);
        if (!x || *x < 0 || std::floor(*x) != *x) fail("expected a non-negative integer");
        return static_cast<std::size_t>(*x);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) fail("expected key=value");
        const std::string key(text::trim(t.substr(0, eq)));
        const auto value = text::trim(t.substr(eq + 1));
        if (key == "n_space") {
            d.n_space = parse_count(value);
            has_space = true;
        } else if (key == "n_time") {
            d.n_time = parse_count(value);
            has_time = true;
        } else if (key == "n_param") {
            d.n_param = parse_count(value);
            has_param = true;
        } else if (key == "params") {
            has_params = true;
            for (const auto& point : text::split(value, ';')) {
                if (text::trim(point).empty()) continue;
                ParameterPoint p;
                std::string cleaned(point);
                for (auto& c : cleaned) {
                    if (c == ',') c = ' ';
                }
                std::istringstream ss(cleaned);
                std::string tok;
                while (ss >> tok) {
                    auto v = text::parse_double(tok);
                    if (!v || !std::isfinite(*v)) fail("bad parameter value '" + tok + "'");
                    p.values.push_back(*v);
                }
                d.params.push_back(std::move(p));
            }
        } else if (key == "dt") {
            auto v = text::parse_double(value);
            if (!v || !(*v > 0)) fail("dt must be positive");
            d.dt = *v;
        } else if (key == "format") {
            if (value == "csv") d.format = IngestDescriptor::Format::csv;
            else if (value == "raw") d.format = IngestDescriptor::Format::raw;
            else fail("format must be csv or raw");
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (!has_space || !has_time || !has_param || !has_params) {
        throw FormatError("descriptor '" + path.string() + "' must define n_space, n_time, n_param and params");
    }
    return d;
}

void write_descriptor(const IngestDescriptor& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "n_space = " << d.n_space << '\n';
    out << "n_time = " << d.n_time << '\n';
    out << "n_param = " << d.n_param << '\n';
    out << "params = ";
    for (std::size_t k = 0; k < d.params.size(); ++k) {
        if (k > 0) out << "; ";
        for (std::size_t i = 0; i < d.params[k].size(); ++i) {
            if (i > 0) out << ' ';
            out << text::format_double(d.params[k][i]);
        }
    }
    out << '\n';
    if (d.dt > 0) out << "dt = " << text::format_double(d.dt) << '\n';
    out << "format = " << (d.format == IngestDescriptor::Format::csv ? "csv" : "raw") << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

SnapshotMatrix ingest_external(const std::filesystem::path& data_path, const IngestDescriptor& d) {
    if (d.params.size() != d.n_param) {
        throw ShapeError("descriptor lists " + std::to_string(d.params.size()) + " parameter points but n_param = " +
                         std::to_string(d.n_param));
    }
    const std::size_t cols = d.n_param * (d.n_time + 1);
    Eigen::MatrixXd data;
    if (d.format == IngestDescriptor::Format::csv) {
        data = read_csv_matrix(data_path);
    } else {
        std::ifstream in(data_path, std::ios::binary | std::ios::ate);
        if (!in) throw IoError("cannot open '" + data_path.string() + "' for reading");
        const auto bytes = static_cast<std::size_t>(in.tellg());
        if (bytes != d.n_space * cols * 8) {
            throw ShapeError("'" + data_path.string() + "' holds " + std::to_string(bytes) + " bytes, descriptor implies " +
                             std::to_string(d.n_space * cols * 8));
        }
        in.seekg(0);
        data.resize(static_cast<Eigen::Index>(d.n_space), static_cast<Eigen::Index>(cols));
        static_assert(std::endian::native == std::endian::little, "raw ingestion assumes a little-endian host");
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
        if (!in) throw IoError("read from '" + data_path.string() + "' failed");
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            for (Eigen::Index i = 0; i < data.rows(); ++i) {
                if (!std::isfinite(data(i, j))) {
                    throw NonFiniteError("'" + data_path.string() + "': non-finite value at row " + std::to_string(i) +
                                             ", column " + std::to_string(j),
                                         static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                }
            }
        }
    }
    if (static_cast<std::size_t>(data.rows()) != d.n_space || static_cast<std::size_t>(data.cols()) != cols) {
        throw ShapeError("'" + data_path.string() + "' is " + std::to_string(data.rows()) + "x" +
                         std::to_string(data.cols()) + " but the descriptor declares " + std::to_string(d.n_space) +
                         "x" + std::to_string(cols) + " (n_param=" + std::to_string(d.n_param) +
                         ", n_time=" + std::to_string(d.n_time) + ")");
    }
    SnapshotMeta meta;
    meta.dt = d.dt;
    return SnapshotMatrix(std::move(data), d.params, d.n_time, std::move(meta));
}

}  // namespace lasdi
