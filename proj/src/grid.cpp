#include "nvscc/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nvscc/errors.hpp"

namespace nvscc {

Grid3D::Grid3D(const Vec3& origin_, const Vec3& spacing_, const Index3& counts_)
    : origin(origin_), spacing(spacing_), counts(counts_) {
    for (int a = 0; a < 3; ++a) {
        if (!(spacing[a] > 0.0))
            throw std::invalid_argument("Grid3D: spacing must be strictly positive on every axis");
        if (counts[a] < 3)
            throw std::invalid_argument("Grid3D: at least 3 nodes per axis required");
    }
    if (node_count() > max_nodes)
        throw std::invalid_argument("Grid3D: node count " + std::to_string(node_count()) +
                                    " exceeds the memory budget of " + std::to_string(max_nodes) +
                                    " nodes");
}

bool Grid3D::contains(const Vec3& p) const {
    const Vec3 ext = extent();
    for (int a = 0; a < 3; ++a) {
        const double lo = origin[a];
        const double hi = origin[a] + ext[a];
        const double tol = 1e-9 * spacing[a];
        if (p[a] < lo - tol || p[a] > hi + tol) return false;
    }
    return true;
}

Grid3D build_grid(const Vec3& extent_nm, const Vec3& spacing_nm) {
    Index3 counts{};
    for (int a = 0; a < 3; ++a) {
        if (!(spacing_nm[a] > 0.0))
            throw std::invalid_argument("build_grid: spacing must be positive");
        if (!(extent_nm[a] > 0.0))
            throw std::invalid_argument("build_grid: extent must be positive");
        // small relative epsilon so exact multiples are not truncated by
        // floating-point noise
        const double ratio = extent_nm[a] / spacing_nm[a];
        counts[a] = std::int64_t(std::floor(ratio * (1.0 + 1e-12))) + 1;
        if (counts[a] < 3)
            throw std::invalid_argument("build_grid: extent/spacing yields fewer than 3 nodes on an axis");
    }
    return Grid3D{{0.0, 0.0, 0.0}, spacing_nm, counts};
}

ScalarField3D::ScalarField3D(const Grid3D& g, std::string unit_label)
    : grid(g), values(std::size_t(g.node_count()), 0.0), unit(std::move(unit_label)) {}

ScalarField3D::ScalarField3D(const Grid3D& g, std::vector<double> vals, std::string unit_label)
    : grid(g), values(std::move(vals)), unit(std::move(unit_label)) {
    if (values.size() != std::size_t(grid.node_count()))
        throw std::invalid_argument("ScalarField3D: value count does not match grid node count");
}

double ScalarField3D::sample(const Vec3& p) const {
    if (!grid.contains(p))
        throw std::invalid_argument("ScalarField3D::sample: point outside grid");
    double fidx[3];
    std::int64_t i0[3];
    double w[3];
    for (int a = 0; a < 3; ++a) {
        fidx[a] = (p[a] - grid.origin[a]) / grid.spacing[a];
        // clamp so points on the far face interpolate within the last cell
        double f = std::min(std::max(fidx[a], 0.0), double(grid.counts[a] - 1));
        i0[a] = std::min(std::int64_t(f), grid.counts[a] - 2);
        w[a] = f - double(i0[a]);
    }
    double result = 0.0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double weight = (dx ? w[0] : 1.0 - w[0]) *
                                      (dy ? w[1] : 1.0 - w[1]) *
                                      (dz ? w[2] : 1.0 - w[2]);
                result += weight * at(i0[0] + dx, i0[1] + dy, i0[2] + dz);
            }
    return result;
}

void ScalarField3D::check_invariants() const {
    if (values.size() != std::size_t(grid.node_count()))
        throw std::invalid_argument("ScalarField3D: value count does not match grid node count");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("ScalarField3D: non-finite value");
}

double squared_norm(const ScalarField3D& field) {
    const double dv = field.grid.cell_volume();
    // fixed-block pairwise accumulation, independent of thread count
    double total = 0.0;
    const std::size_t n = field.values.size();
    constexpr std::size_t block = 4096;
    for (std::size_t b = 0; b < n; b += block) {
        double s = 0.0;
        const std::size_t end = std::min(b + block, n);
        for (std::size_t i = b; i < end; ++i) s += field.values[i] * field.values[i];
        total += s;
    }
    return total * dv;
}

GaussianMoments gaussian_moments(const ScalarField3D& envelope) {
    const double norm = squared_norm(envelope);
    if (std::abs(norm - 1.0) > 1e-6)
        throw PreconditionViolation(
            "gaussian_moments: envelope not normalized, sum|F|^2 dV = " + std::to_string(norm));

    const Grid3D& g = envelope.grid;
    const double dv = g.cell_volume();
    double w_sum = 0.0;
    Vec3 first{0.0, 0.0, 0.0};
    for (std::int64_t iz = 0; iz < g.counts[2]; ++iz)
        for (std::int64_t iy = 0; iy < g.counts[1]; ++iy)
            for (std::int64_t ix = 0; ix < g.counts[0]; ++ix) {
                const double f = envelope.at(ix, iy, iz);
                const double w = f * f * dv;
                const Vec3 p = g.position(ix, iy, iz);
                w_sum += w;
                for (int a = 0; a < 3; ++a) first[a] += w * p[a];
            }
    for (int a = 0; a < 3; ++a) first[a] /= w_sum;

    Vec3 second{0.0, 0.0, 0.0};
    for (std::int64_t iz = 0; iz < g.counts[2]; ++iz)
        for (std::int64_t iy = 0; iy < g.counts[1]; ++iy)
            for (std::int64_t ix = 0; ix < g.counts[0]; ++ix) {
                const double f = envelope.at(ix, iy, iz);
                const double w = f * f * dv;
                const Vec3 p = g.position(ix, iy, iz);
                for (int a = 0; a < 3; ++a) {
                    const double d = p[a] - first[a];
                    second[a] += w * d * d;
                }
            }
    GaussianMoments m;
    m.center_nm = first;
    for (int a = 0; a < 3; ++a)
        m.sigma_nm[a] = std::sqrt(std::max(second[a] / w_sum, 0.0));
    return m;
}

} // namespace nvscc
