#include "nvscc/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "nvscc/errors.hpp"

namespace nvscc {

namespace {

enum class NodeKind : std::uint8_t { Free = 0, Fixed = 1 };

/// One multigrid level: geometry, node classification and work arrays.
/// Top-face (iz == 0) free nodes carry a mirror (Neumann) stencil.
struct Level {
    Index3 n{};
    Vec3 h{};
    std::vector<std::uint8_t> kind;
    std::vector<double> v;    // solution / correction
    std::vector<double> rhs;  // right-hand side (zero on the finest level)
    std::vector<double> res;  // residual scratch

    std::int64_t idx(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return i + n[0] * (j + n[1] * k);
    }
    std::int64_t size() const { return n[0] * n[1] * n[2]; }
    bool coarsenable_axis(int a) const { return n[a] >= 5 && (n[a] - 1) % 2 == 0; }
    bool coarsenable() const {
        return coarsenable_axis(0) || coarsenable_axis(1) || coarsenable_axis(2);
    }
};

struct Stencil {
    double wx, wy, wz, diag;
};

Stencil stencil_for(const Level& L) {
    Stencil s;
    s.wx = 1.0 / (L.h[0] * L.h[0]);
    s.wy = 1.0 / (L.h[1] * L.h[1]);
    s.wz = 1.0 / (L.h[2] * L.h[2]);
    s.diag = 2.0 * (s.wx + s.wy + s.wz);
    return s;
}

/// Gauss-Seidel sweep over one red-black color on free nodes.
void smooth_color(Level& L, int color, double omega) {
    const Stencil st = stencil_for(L);
    const auto [nx, ny, nz] = L.n;
    for (std::int64_t k = 0; k < nz; ++k)
        for (std::int64_t j = 0; j < ny; ++j) {
            const std::int64_t i0 = (k + j + color) & 1;
            for (std::int64_t i = i0; i < nx; i += 2) {
                const std::int64_t c = L.idx(i, j, k);
                if (L.kind[std::size_t(c)] != std::uint8_t(NodeKind::Free)) continue;
                const double xm = L.v[std::size_t(c - 1)];
                const double xp = L.v[std::size_t(c + 1)];
                const double ym = L.v[std::size_t(c - nx)];
                const double yp = L.v[std::size_t(c + nx)];
                // mirror across the surface for the Neumann top face
                const double zm = (k == 0) ? L.v[std::size_t(c + nx * ny)]
                                           : L.v[std::size_t(c - nx * ny)];
                const double zp = L.v[std::size_t(c + nx * ny)];
                const double sum = st.wx * (xm + xp) + st.wy * (ym + yp) + st.wz * (zm + zp);
                const double gs = (sum - L.rhs[std::size_t(c)]) / st.diag;
                L.v[std::size_t(c)] += omega * (gs - L.v[std::size_t(c)]);
            }
        }
}

void smooth(Level& L, int sweeps, double omega = 1.0) {
    for (int s = 0; s < sweeps; ++s) {
        smooth_color(L, 0, omega);
        smooth_color(L, 1, omega);
    }
}

/// res = rhs - A v on free nodes, zero elsewhere. Returns sum of squares.
double compute_residual(Level& L) {
    const Stencil st = stencil_for(L);
    const auto [nx, ny, nz] = L.n;
    double total = 0.0;
    for (std::int64_t k = 0; k < nz; ++k) {
        double slab = 0.0;
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t i = 0; i < nx; ++i) {
                const std::int64_t c = L.idx(i, j, k);
                if (L.kind[std::size_t(c)] != std::uint8_t(NodeKind::Free)) {
                    L.res[std::size_t(c)] = 0.0;
                    continue;
                }
                const double xm = L.v[std::size_t(c - 1)];
                const double xp = L.v[std::size_t(c + 1)];
                const double ym = L.v[std::size_t(c - nx)];
                const double yp = L.v[std::size_t(c + nx)];
                const double zm = (k == 0) ? L.v[std::size_t(c + nx * ny)]
                                           : L.v[std::size_t(c - nx * ny)];
                const double zp = L.v[std::size_t(c + nx * ny)];
                const double av = st.wx * (xm + xp) + st.wy * (ym + yp) +
                                  st.wz * (zm + zp) - st.diag * L.v[std::size_t(c)];
                const double r = L.rhs[std::size_t(c)] - av;
                L.res[std::size_t(c)] = r;
                slab += r * r;
            }
        total += slab;
    }
    return total;
}

/// Full-weighting restriction of the fine residual into the coarse rhs.
/// Coarse stride per axis is 2 where the axis coarsens, else 1; weights
/// along a coarsened axis are (1/4, 1/2, 1/4), uncoarsened axes pass
/// through. Out-of-range fine neighbors contribute zero.
void restrict_residual(const Level& fine, Level& coarse, const Index3& stride) {
    auto axis_weight = [](std::int64_t s, int d) {
        if (s == 1) return d == 0 ? 1.0 : 0.0;
        return d == 0 ? 0.5 : 0.25;
    };
    for (std::int64_t k = 0; k < coarse.n[2]; ++k)
        for (std::int64_t j = 0; j < coarse.n[1]; ++j)
            for (std::int64_t i = 0; i < coarse.n[0]; ++i) {
                const std::int64_t fi = i * stride[0], fj = j * stride[1], fk = k * stride[2];
                double acc = 0.0;
                for (int dk = -1; dk <= 1; ++dk) {
                    const double wk = axis_weight(stride[2], dk);
                    if (wk == 0.0) continue;
                    const std::int64_t zk = fk + dk;
                    if (zk < 0 || zk >= fine.n[2]) continue;
                    for (int dj = -1; dj <= 1; ++dj) {
                        const double wj = axis_weight(stride[1], dj);
                        if (wj == 0.0) continue;
                        const std::int64_t zj = fj + dj;
                        if (zj < 0 || zj >= fine.n[1]) continue;
                        for (int di = -1; di <= 1; ++di) {
                            const double wi = axis_weight(stride[0], di);
                            if (wi == 0.0) continue;
                            const std::int64_t zi = fi + di;
                            if (zi < 0 || zi >= fine.n[0]) continue;
                            acc += wi * wj * wk * fine.res[std::size_t(fine.idx(zi, zj, zk))];
                        }
                    }
                }
                const std::int64_t cc = coarse.idx(i, j, k);
                coarse.rhs[std::size_t(cc)] = acc;
                coarse.v[std::size_t(cc)] = 0.0;
            }
}

/// Trilinear prolongation of the coarse correction added onto the fine value.
void prolong_add(const Level& coarse, Level& fine, const Index3& stride) {
    const auto [nx, ny, nz] = fine.n;
    for (std::int64_t k = 0; k < nz; ++k) {
        const double fk = double(k) / double(stride[2]);
        const std::int64_t k0 = std::min(std::int64_t(fk), coarse.n[2] - 2);
        const double wk = fk - double(k0);
        for (std::int64_t j = 0; j < ny; ++j) {
            const double fj = double(j) / double(stride[1]);
            const std::int64_t j0 = std::min(std::int64_t(fj), coarse.n[1] - 2);
            const double wj = fj - double(j0);
            for (std::int64_t i = 0; i < nx; ++i) {
                const std::int64_t c = fine.idx(i, j, k);
                if (fine.kind[std::size_t(c)] != std::uint8_t(NodeKind::Free)) continue;
                const double fi = double(i) / double(stride[0]);
                const std::int64_t i0 = std::min(std::int64_t(fi), coarse.n[0] - 2);
                const double wi = fi - double(i0);
                double corr = 0.0;
                for (int dk = 0; dk < 2; ++dk)
                    for (int dj = 0; dj < 2; ++dj)
                        for (int di = 0; di < 2; ++di) {
                            const double w = (di ? wi : 1.0 - wi) * (dj ? wj : 1.0 - wj) *
                                             (dk ? wk : 1.0 - wk);
                            if (w == 0.0) continue;
                            corr += w * coarse.v[std::size_t(
                                             coarse.idx(i0 + di, j0 + dj, k0 + dk))];
                        }
                fine.v[std::size_t(c)] += corr;
            }
        }
    }
}

struct Hierarchy {
    std::vector<Level> levels;       // [0] = finest
    std::vector<Index3> strides;     // stride from level l to l+1
};

/// Node classification callback: given level dims/spacing and node index,
/// returns the kind and, for fixed nodes, the Dirichlet value.
using Classifier =
    std::function<NodeKind(const Level&, std::int64_t, std::int64_t, std::int64_t, double&)>;

Hierarchy build_hierarchy(const Grid3D& grid, const Classifier& classify) {
    Hierarchy h;
    Level finest;
    finest.n = grid.counts;
    finest.h = grid.spacing;
    h.levels.push_back(std::move(finest));
    while (h.levels.back().coarsenable() && h.levels.back().size() > 4096 &&
           h.levels.size() < 12) {
        const Level& f = h.levels.back();
        Level c;
        Index3 stride;
        for (int a = 0; a < 3; ++a) {
            if (f.coarsenable_axis(a)) {
                c.n[a] = (f.n[a] - 1) / 2 + 1;
                c.h[a] = f.h[a] * 2.0;
                stride[a] = 2;
            } else {
                c.n[a] = f.n[a];
                c.h[a] = f.h[a];
                stride[a] = 1;
            }
        }
        h.strides.push_back(stride);
        h.levels.push_back(std::move(c));
    }
    for (Level& L : h.levels) {
        const std::size_t sz = std::size_t(L.size());
        L.kind.assign(sz, std::uint8_t(NodeKind::Free));
        L.v.assign(sz, 0.0);
        L.rhs.assign(sz, 0.0);
        L.res.assign(sz, 0.0);
        for (std::int64_t k = 0; k < L.n[2]; ++k)
            for (std::int64_t j = 0; j < L.n[1]; ++j)
                for (std::int64_t i = 0; i < L.n[0]; ++i) {
                    double value = 0.0;
                    const NodeKind kind = classify(L, i, j, k, value);
                    const std::int64_t c = L.idx(i, j, k);
                    L.kind[std::size_t(c)] = std::uint8_t(kind);
                    if (kind == NodeKind::Fixed) L.v[std::size_t(c)] = value;
                }
    }
    // Dirichlet values belong to the finest level only; coarse levels solve
    // correction equations with zero on fixed nodes.
    for (std::size_t l = 1; l < h.levels.size(); ++l)
        std::fill(h.levels[l].v.begin(), h.levels[l].v.end(), 0.0);
    return h;
}

void v_cycle(Hierarchy& h, std::size_t l) {
    Level& L = h.levels[l];
    if (l + 1 == h.levels.size()) {
        smooth(L, 60);
        return;
    }
    smooth(L, 2);
    compute_residual(L);
    restrict_residual(L, h.levels[l + 1], h.strides[l]);
    v_cycle(h, l + 1);
    prolong_add(h.levels[l + 1], L, h.strides[l]);
    smooth(L, 2);
}

PotentialSolution run_solver(const Grid3D& grid, const Classifier& classify, double tol,
                             std::int64_t max_cycles, const char* what) {
    Hierarchy h = build_hierarchy(grid, classify);
    Level& fine = h.levels[0];

    const double r0 = std::sqrt(compute_residual(fine));
    double rel = (r0 == 0.0) ? 0.0 : 1.0;
    std::int64_t cycles = 0;
    while (rel > tol && cycles < max_cycles) {
        v_cycle(h, 0);
        ++cycles;
        const double r = std::sqrt(compute_residual(fine));
        rel = (r0 == 0.0) ? 0.0 : r / r0;
    }
    if (rel > tol)
        throw SolverFailure(std::string(what) + ": no convergence within iteration cap", rel);

    PotentialSolution sol;
    sol.potential = ScalarField3D(grid, std::move(fine.v), "V");
    sol.residual = rel;
    sol.iterations = cycles;
    return sol;
}

} // namespace

void PotentialSolution::check_invariants(double electrode_voltage_mV, double tol) const {
    potential.check_invariants();
    const double vmax = std::abs(electrode_voltage_mV) * 1e-3;
    for (double v : potential.values)
        if (std::abs(v) > vmax * (1.0 + 1e-9) + 1e-30)
            throw ComputationFailure("PotentialSolution: maximum principle violated");
    if (residual > tol)
        throw ComputationFailure("PotentialSolution: residual above tolerance");
}

PotentialSolution solve_potential(const DeviceGeometry& geometry, const Grid3D& grid,
                                  double tol, std::int64_t max_cycles, int /*threads*/) {
    const Vec3 ext = grid.extent();
    const double cx = grid.origin[0] + 0.5 * ext[0];
    const double cy = grid.origin[1] + 0.5 * ext[1];
    const double radius = geometry.electrode_radius;
    const double v_volts = geometry.electrode_voltage * 1e-3;
    // grid coordinates are nm; classification is purely geometric, so each
    // multigrid level reuses the same rules at its own spacing
    const Vec3 origin = grid.origin;

    Classifier classify = [=](const Level& L, std::int64_t i, std::int64_t j, std::int64_t k,
                              double& value) {
        const bool lateral = (i == 0 || i == L.n[0] - 1 || j == 0 || j == L.n[1] - 1);
        const bool bottom = (k == L.n[2] - 1);
        if (lateral || bottom) {
            value = 0.0;
            return NodeKind::Fixed;
        }
        if (k == 0) {
            const double x = origin[0] + double(i) * L.h[0];
            const double y = origin[1] + double(j) * L.h[1];
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= radius * radius) {
                value = v_volts;
                return NodeKind::Fixed;
            }
        }
        return NodeKind::Free;
    };

    PotentialSolution sol = run_solver(grid, classify, tol, max_cycles, "solve_potential");
    sol.check_invariants(geometry.electrode_voltage, tol);
    return sol;
}

PotentialSolution solve_laplace_dirichlet(const Grid3D& grid,
                                          const std::function<double(const Vec3&)>& boundary,
                                          double tol, std::int64_t max_cycles, int /*threads*/) {
    const Vec3 origin = grid.origin;
    Classifier classify = [&boundary, origin](const Level& L, std::int64_t i, std::int64_t j,
                                              std::int64_t k, double& value) {
        const bool face = (i == 0 || i == L.n[0] - 1 || j == 0 || j == L.n[1] - 1 || k == 0 ||
                           k == L.n[2] - 1);
        if (!face) return NodeKind::Free;
        value = boundary({origin[0] + double(i) * L.h[0], origin[1] + double(j) * L.h[1],
                          origin[2] + double(k) * L.h[2]});
        return NodeKind::Fixed;
    };
    return run_solver(grid, classify, tol, max_cycles, "solve_laplace_dirichlet");
}

std::vector<std::pair<double, double>> axial_profile(const PotentialSolution& solution,
                                                     double x_nm, double y_nm) {
    const Grid3D& g = solution.potential.grid;
    const Vec3 ext = g.extent();
    if (x_nm < g.origin[0] || x_nm > g.origin[0] + ext[0] || y_nm < g.origin[1] ||
        y_nm > g.origin[1] + ext[1])
        throw std::invalid_argument("axial_profile: point outside grid footprint");
    std::vector<std::pair<double, double>> out;
    out.reserve(std::size_t(g.counts[2]));
    for (std::int64_t k = 0; k < g.counts[2]; ++k) {
        const double z = g.origin[2] + double(k) * g.spacing[2];
        const double v = solution.potential.sample({x_nm, y_nm, z});
        out.emplace_back(z, v * 1e3);
    }
    return out;
}

} // namespace nvscc
