#ifndef NVSCC_GRID_HPP
#define NVSCC_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nvscc {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<std::int64_t, 3>;

/// Structured Cartesian grid. Node i along axis a sits at
/// origin[a] + i * spacing[a], i in [0, counts[a]).
///
/// Fields sampled on the grid are stored flat, row-major in (x,y,z) order
/// with x fastest: index = ix + nx*(iy + ny*iz). This layout is fixed so
/// exported binaries are bit-reproducible.
struct Grid3D {
    Vec3 origin{0.0, 0.0, 0.0};   // nm
    Vec3 spacing{1.0, 1.0, 1.0};  // nm, strictly positive
    Index3 counts{0, 0, 0};       // nodes per axis, >= 3 each

    /// Hard cap on total node count (2^26 ~ 6.7e7 nodes, 512 MiB per
    /// double field). Construction checks against it.
    static constexpr std::int64_t max_nodes = std::int64_t(1) << 26;

    Grid3D() = default;
    Grid3D(const Vec3& origin, const Vec3& spacing, const Index3& counts);

    std::int64_t node_count() const { return counts[0] * counts[1] * counts[2]; }
    double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    std::int64_t index(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
        return ix + counts[0] * (iy + counts[1] * iz);
    }
    Vec3 position(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
        return {origin[0] + double(ix) * spacing[0],
                origin[1] + double(iy) * spacing[1],
                origin[2] + double(iz) * spacing[2]};
    }
    /// Extent covered by the nodes, (counts-1)*spacing, per axis [nm].
    Vec3 extent() const {
        return {double(counts[0] - 1) * spacing[0],
                double(counts[1] - 1) * spacing[1],
                double(counts[2] - 1) * spacing[2]};
    }
    bool contains(const Vec3& p) const;

    bool operator==(const Grid3D& o) const {
        return origin == o.origin && spacing == o.spacing && counts == o.counts;
    }
};

/// Build a grid from per-axis extents and spacings, origin at zero.
/// counts[a] = floor(extent[a]/spacing[a]) + 1, so nodes cover
/// [0, extent] inclusive when spacing divides extent.
Grid3D build_grid(const Vec3& extent_nm, const Vec3& spacing_nm);

/// A real scalar quantity sampled on a grid. `unit` is carried as metadata
/// only (e.g. "V" for potentials, "nm^-3/2" for envelopes).
struct ScalarField3D {
    Grid3D grid;
    std::vector<double> values;
    std::string unit;

    ScalarField3D() = default;
    ScalarField3D(const Grid3D& g, std::string unit_label);
    ScalarField3D(const Grid3D& g, std::vector<double> vals, std::string unit_label);

    double& at(std::int64_t ix, std::int64_t iy, std::int64_t iz) {
        return values[std::size_t(grid.index(ix, iy, iz))];
    }
    double at(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
        return values[std::size_t(grid.index(ix, iy, iz))];
    }

    /// Trilinear interpolation at a point inside the grid.
    /// Throws std::invalid_argument for points outside.
    double sample(const Vec3& p_nm) const;

    /// Throws if any value is non-finite or the size mismatches the grid.
    void check_invariants() const;
};

/// First and second central moments of |F|^2 for a normalized envelope.
struct GaussianMoments {
    Vec3 sigma_nm;   // sqrt of second central moment per axis
    Vec3 center_nm;  // first moment of |F|^2
};

/// Moments of |F|^2 dV over the grid. Precondition: the field is
/// normalized, |sum |F|^2 dV - 1| <= 1e-6; violations throw
/// PreconditionViolation.
GaussianMoments gaussian_moments(const ScalarField3D& envelope);

/// sum |F|^2 dV over all nodes (dV in nm^3).
double squared_norm(const ScalarField3D& field);

} // namespace nvscc

#endif
