#pragma once

#include "lasdi/interpolation.hpp"
#include "lasdi/regression.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lasdi {

enum class DiKind { global, local, interpolated };
enum class InterpMethod { rbf, bilinear };

std::string_view to_string(DiKind k);
std::string_view to_string(InterpMethod m);
DiKind parse_di_kind(std::string_view name);
InterpMethod parse_interp_method(std::string_view name);

struct DiStrategy {
    DiKind kind = DiKind::global;
    std::size_t n_di = 0;  ///< neighbours for local and rbf; 0 selects all training points
    InterpMethod method = InterpMethod::rbf;
};

/// Collection of identified latent ODEs and the rule that picks one for a
/// query parameter.
///
/// global: one fit over all training points.
/// local: fit over the n_DI nearest training points, computed on first use
///   and cached by neighbour set (thread-safe).
/// interpolated: one fit per training point; coefficients are blended by a
///   multiquadric RBF over the n_DI nearest points, or bilinearly within the
///   enclosing cell of a uniform 2D training grid.
class DiEnsemble {
public:
    /// Throws GridError when bilinear interpolation is requested on a
    /// training set that is not a uniform 2D grid.
    static DiEnsemble fit(const LatentSnapshotMatrix& latent, const LibrarySpec& spec, double dt,
                          const DiStrategy& strategy, bool rescale = false);

    /// Coefficients for `query`. Local fits are shared between queries with the
    /// same neighbour set.
    std::shared_ptr<const CoefficientMatrix> coefficients(const ParameterPoint& query) const;

    const DiStrategy& strategy() const { return strategy_; }
    const LibrarySpec& spec() const { return spec_; }
    double scale() const { return scale_; }
    double dt() const { return dt_; }
    const std::vector<ParameterPoint>& training() const { return training_; }
    std::size_t cached_regions() const;

    /// Readable form of the identified equations.
    std::string dump() const;

    /// .ldim persistence, including cached local regions.
    void save(const std::filesystem::path& path) const;
    static DiEnsemble load(const std::filesystem::path& path);

    DiEnsemble(DiEnsemble&& other) noexcept;
    DiEnsemble& operator=(DiEnsemble&& other) noexcept;
    DiEnsemble(const DiEnsemble&) = delete;
    DiEnsemble& operator=(const DiEnsemble&) = delete;

private:
    DiEnsemble() = default;
    std::size_t effective_n_di() const;

    DiStrategy strategy_;
    LibrarySpec spec_;
    double scale_ = 1.0;
    double dt_ = 0.0;
    std::vector<ParameterPoint> training_;
    std::shared_ptr<const CoefficientMatrix> global_;
    std::vector<Eigen::MatrixXd> per_point_;    // interpolated
    std::vector<Eigen::MatrixXd> blocks_;       // local, already scaled
    std::optional<UniformGrid2> grid_;          // bilinear

    mutable std::mutex cache_mutex_;
    mutable std::map<std::vector<std::size_t>, std::shared_ptr<const CoefficientMatrix>> cache_;
};

/// "dz1/dt = 0.31 - 1.2*z1 + 0.05*z2" style text for one coefficient matrix.
std::string format_equations(const CoefficientMatrix& c);

}  // namespace lasdi
