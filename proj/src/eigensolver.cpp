#include "nvscc/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <Eigen/Dense>

#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"

namespace nvscc {

namespace kc = constants;

MassTensor::MassTensor(double mx, double my, double mz) : m_x(mx), m_y(my), m_z(mz) {
    if (!(m_x > 0.0) || !(m_y > 0.0) || !(m_z > 0.0))
        throw std::invalid_argument("MassTensor: masses must be strictly positive");
}

namespace {

/// hbar^2/(2 m delta^2) in micro-eV for delta in nm and m in electron masses.
double kinetic_coef_ueV(double mass_rel, double delta_nm) {
    const double m = mass_rel * kc::electron_mass;
    const double d = kc::nm_to_m(delta_nm);
    const double joules = kc::hbar * kc::hbar / (2.0 * m * d * d);
    return kc::joule_to_ueV(joules);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return double(splitmix64(state) >> 11) * 0x1.0p-53;
}

} // namespace

HamiltonianOperator::HamiltonianOperator(const Grid3D& grid,
                                         std::vector<double> potential_energy_ueV,
                                         const MassTensor& mass)
    : grid_(grid), u_(std::move(potential_energy_ueV)) {
    if (u_.size() != std::size_t(grid_.node_count()))
        throw std::invalid_argument("HamiltonianOperator: grid/potential mismatch");
    cx_ = kinetic_coef_ueV(mass.m_x, grid_.spacing[0]);
    cy_ = kinetic_coef_ueV(mass.m_y, grid_.spacing[1]);
    cz_ = kinetic_coef_ueV(mass.m_z, grid_.spacing[2]);
}

void HamiltonianOperator::apply(const double* x, double* y, int threads) const {
    const auto [nx, ny, nz] = grid_.counts;
    const double diag_kin = 2.0 * (cx_ + cy_ + cz_);
    const double cx = cx_, cy = cy_, cz = cz_;
    const double* u = u_.data();

    auto work = [&](std::int64_t z0, std::int64_t z1) {
        for (std::int64_t k = z0; k < z1; ++k) {
            const bool zedge = (k == 0 || k == nz - 1);
            for (std::int64_t j = 0; j < ny; ++j) {
                const std::int64_t row = nx * (j + ny * k);
                if (zedge || j == 0 || j == ny - 1) {
                    for (std::int64_t i = 0; i < nx; ++i) y[row + i] = 0.0;
                    continue;
                }
                y[row] = 0.0;
                y[row + nx - 1] = 0.0;
                const std::int64_t sy = nx, sz = nx * ny;
                for (std::int64_t i = 1; i < nx - 1; ++i) {
                    const std::int64_t c = row + i;
                    y[c] = (diag_kin + u[c]) * x[c] - cx * (x[c - 1] + x[c + 1]) -
                           cy * (x[c - sy] + x[c + sy]) - cz * (x[c - sz] + x[c + sz]);
                }
            }
        }
    };

    if (threads <= 1 || nz < 8) {
        work(0, nz);
        return;
    }
    const int nt = std::min<std::int64_t>(threads, nz);
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(nt));
    for (int t = 0; t < nt; ++t) {
        const std::int64_t z0 = nz * t / nt;
        const std::int64_t z1 = nz * (t + 1) / nt;
        pool.emplace_back(work, z0, z1);
    }
    for (auto& th : pool) th.join();
}

double HamiltonianOperator::upper_bound() const {
    const double kin = 4.0 * (cx_ + cy_ + cz_);
    double umax = u_[0];
    for (double v : u_) umax = std::max(umax, v);
    return kin + umax;
}

double HamiltonianOperator::lower_bound() const {
    double umin = u_[0];
    for (double v : u_) umin = std::min(umin, v);
    return umin;
}

HamiltonianOperator assemble_hamiltonian(const Grid3D& grid, const ScalarField3D& potential,
                                         const MassTensor& mass) {
    if (!(potential.grid == grid))
        throw std::invalid_argument("assemble_hamiltonian: grid/potential mismatch");
    std::vector<double> u(potential.values.size());
    // electron potential energy -e V: volts -> micro-eV is a factor -1e6
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = -1e6 * potential.values[i];
    return HamiltonianOperator(grid, std::move(u), mass);
}

void EigenSolution::check_invariants(double residual_tol_ueV) const {
    for (std::size_t i = 1; i < energies_ueV.size(); ++i)
        if (energies_ueV[i] < energies_ueV[i - 1] - 1e-9)
            throw ComputationFailure("EigenSolution: energies not sorted");
    for (std::size_t i = 0; i < envelopes.size(); ++i) {
        const double nrm = squared_norm(envelopes[i]);
        if (std::abs(normalization_Ae[i] / kc::diamond_cell_volume_nm3 * nrm - 1.0) > 1e-8)
            throw ComputationFailure("EigenSolution: envelope normalization violated");
    }
    for (double r : residuals)
        if (r > residual_tol_ueV)
            throw ComputationFailure("EigenSolution: residual above tolerance");
}

namespace {

using Matrix = Eigen::MatrixXd;
using Eigen::Map;

/// Orthonormalize the columns of X (n x m, column-major) via its Gram
/// matrix; directions with relative Gram eigenvalue below `drop` are
/// replaced by zero columns (caller re-seeds). Returns the retained count.
int gram_orthonormalize(Map<Matrix>& X, double drop = 1e-28) {
    const auto m = X.cols();
    Matrix g = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const double gmax = es.eigenvalues().maxCoeff();
    Matrix t = Matrix::Zero(m, m);
    int kept = 0;
    for (Eigen::Index c = 0; c < m; ++c) {
        const double ev = es.eigenvalues()(c);
        if (ev > drop * gmax && ev > 0.0) {
            t.col(c) = es.eigenvectors().col(c) / std::sqrt(ev);
            ++kept;
        }
    }
    X = (X * t).eval();
    return kept;
}

/// y <- T_deg(t(H)) x where t maps [lo, hi] to [-1, 1]; three-term
/// Chebyshev recurrence, column by column.
void chebyshev_filter(const HamiltonianOperator& H, double lo, double hi, int deg,
                      const double* x, double* y, std::vector<double>& t1,
                      std::vector<double>& t2, int threads) {
    const std::int64_t n = H.dimension();
    const double center = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    // t1 = t(H) x
    H.apply(x, t1.data(), threads);
    for (std::int64_t i = 0; i < n; ++i) t1[std::size_t(i)] = (t1[std::size_t(i)] - center * x[i]) / half;
    if (deg == 1) {
        std::copy(t1.begin(), t1.end(), y);
        return;
    }
    std::vector<double>* prev = &t2;  // T_{k-1} x
    std::vector<double>* cur = &t1;   // T_k x
    std::copy(x, x + n, prev->data());
    std::vector<double> next(std::size_t(n), 0.0);
    for (int k = 1; k < deg; ++k) {
        H.apply(cur->data(), next.data(), threads);
        for (std::int64_t i = 0; i < n; ++i) {
            const double ti = (next[std::size_t(i)] - center * (*cur)[std::size_t(i)]) / half;
            next[std::size_t(i)] = 2.0 * ti - (*prev)[std::size_t(i)];
        }
        std::swap(*prev, *cur);
        std::swap(*cur, next);
    }
    std::copy(cur->begin(), cur->end(), y);
}

void seed_column(double* col, const Grid3D& g, std::uint64_t seed) {
    const auto [nx, ny, nz] = g.counts;
    std::uint64_t state = seed;
    for (std::int64_t k = 0; k < nz; ++k)
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t i = 0; i < nx; ++i) {
                const std::int64_t c = g.index(i, j, k);
                const bool edge = (i == 0 || i == nx - 1 || j == 0 || j == ny - 1 || k == 0 ||
                                   k == nz - 1);
                col[c] = edge ? 0.0 : (uniform01(state) - 0.5);
            }
}

} // namespace

EigenSolution lowest_eigenpairs(const HamiltonianOperator& H, std::int64_t count,
                                const EigensolverOptions& opts) {
    if (count < 1) throw std::invalid_argument("lowest_eigenpairs: count must be >= 1");
    const std::int64_t n = H.dimension();
    const std::int64_t interior = (H.grid().counts[0] - 2) * (H.grid().counts[1] - 2) *
                                  (H.grid().counts[2] - 2);
    if (count * 4 >= interior)
        throw std::invalid_argument("lowest_eigenpairs: count too large for the grid");

    const std::int64_t guard = std::max<std::int64_t>(3, count / 2);
    const std::int64_t m = count + guard;

    const double hi0 = H.upper_bound();
    const double lo0 = H.lower_bound();
    const double scale = std::max(std::abs(hi0), std::abs(lo0));
    const double tol_abs = opts.tol * scale;

    std::vector<double> xbuf(std::size_t(n * m));
    Map<Matrix> X(xbuf.data(), n, m);
    std::uint64_t seed_base = opts.seed * 0x9e3779b97f4a7c15ull + 0x443f
                              + std::uint64_t(H.grid().counts[0] * 131 + H.grid().counts[2]);
    for (std::int64_t c = 0; c < m; ++c) {
        if (opts.warm_start && c < std::int64_t(opts.warm_start->envelopes.size()) &&
            opts.warm_start->envelopes[std::size_t(c)].grid == H.grid()) {
            const auto& src = opts.warm_start->envelopes[std::size_t(c)].values;
            std::copy(src.begin(), src.end(), xbuf.begin() + std::size_t(c * n));
        } else {
            seed_column(xbuf.data() + c * n, H.grid(), seed_base + std::uint64_t(c) * 7919u);
        }
    }
    gram_orthonormalize(X);

    std::vector<double> axbuf(std::size_t(n * m));
    Map<Matrix> AX(axbuf.data(), n, m);
    std::vector<double> scratch1(std::size_t(n), 0.0), scratch2(std::size_t(n), 0.0);
    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd resnorm = Eigen::VectorXd::Constant(m, 1e300);

    // Filter window: [filter_lo, hi]. filter_lo starts above the estimated
    // cluster and adapts to the current Ritz values each outer iteration.
    double hi = hi0 + 0.01 * (hi0 - lo0);
    double filter_lo = lo0 + 0.25 * (hi0 - lo0);

    std::int64_t applies = 0;
    const int deg = 30;
    double worst = 1e300;
    bool first = true;
    while (applies < opts.max_iters) {
        if (!first) {
            for (std::int64_t c = 0; c < m; ++c) {
                chebyshev_filter(H, filter_lo, hi, deg, X.col(c).data(),
                                 X.col(c).data(), scratch1, scratch2, opts.threads);
            }
            applies += deg;
        }
        first = false;
        const int kept = gram_orthonormalize(X);
        if (kept < m) {
            // refresh dropped directions deterministically
            for (std::int64_t c = kept; c < m; ++c)
                seed_column(xbuf.data() + c * n, H.grid(),
                            seed_base + 0x5851f42du + std::uint64_t(applies + c) * 104729u);
            gram_orthonormalize(X);
        }
        for (std::int64_t c = 0; c < m; ++c) {
            H.apply(X.col(c).data(), AX.col(c).data(), opts.threads);
        }
        ++applies;
        Matrix rr = X.transpose() * AX;
        rr = 0.5 * (rr + rr.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(rr);
        ritz = es.eigenvalues();
        X = (X * es.eigenvectors()).eval();
        AX = (AX * es.eigenvectors()).eval();
        worst = 0.0;
        for (std::int64_t c = 0; c < m; ++c) {
            const double r = (AX.col(c) - ritz(c) * X.col(c)).norm();
            resnorm(c) = r;
            if (c < count) worst = std::max(worst, r);
        }
        if (worst <= tol_abs) break;
        // adapt the filter window: suppress everything above the guard band
        filter_lo = ritz(m - 1) + 0.01 * (hi0 - ritz(m - 1));
        filter_lo = std::min(filter_lo, hi0);
        filter_lo = std::max(filter_lo, ritz(count - 1) + 1e-6 * (hi0 - lo0));
    }
    if (worst > tol_abs)
        throw SolverFailure("lowest_eigenpairs: eigensolver stagnation", worst);

    EigenSolution sol;
    sol.energies_ueV.resize(std::size_t(count));
    sol.residuals.resize(std::size_t(count));
    sol.envelopes.reserve(std::size_t(count));
    sol.normalization_Ae.assign(std::size_t(count), 0.0);
    const double dv = H.grid().cell_volume();
    for (std::int64_t c = 0; c < count; ++c) {
        sol.energies_ueV[std::size_t(c)] = ritz(c);
        sol.residuals[std::size_t(c)] = resnorm(c);
        std::vector<double> env(xbuf.begin() + std::size_t(c * n),
                                xbuf.begin() + std::size_t((c + 1) * n));
        // L2-normalize on the grid so that A_e = V_c exactly
        double s2 = 0.0;
        for (double v : env) s2 += v * v;
        const double inv = 1.0 / std::sqrt(s2 * dv);
        for (double& v : env) v *= inv;
        sol.envelopes.emplace_back(H.grid(), std::move(env), "nm^-3/2");
        sol.normalization_Ae[std::size_t(c)] = kc::diamond_cell_volume_nm3;
    }
    return sol;
}

ValleySet solve_valleys_full(const ScalarField3D& potential, const MaterialParams& material,
                             std::int64_t per_valley_count, const EigensolverOptions& opts,
                             const ValleySet* warm_start) {
    const double ml = material.m_longitudinal;
    const double mt = material.m_transverse;
    const MassTensor tensors[3] = {MassTensor(ml, mt, mt), MassTensor(mt, ml, mt),
                                   MassTensor(mt, mt, ml)};
    const char* labels[3] = {"x", "y", "z"};

    ValleySet set;
    double reference = 0.0;
    for (int v = 0; v < 3; ++v) {
        HamiltonianOperator H = assemble_hamiltonian(potential.grid, potential, tensors[v]);
        if (v == 0) reference = H.lower_bound();  // min potential energy, -e max V
        EigensolverOptions vo = opts;
        vo.seed = opts.seed + std::uint64_t(v) * 1315423911u;
        if (warm_start && warm_start->solutions.size() == 3)
            vo.warm_start = &warm_start->solutions[std::size_t(v)];
        try {
            EigenSolution sol = lowest_eigenpairs(H, per_valley_count, vo);
            sol.valley = labels[v];
            set.solutions.push_back(std::move(sol));
        } catch (const SolverFailure& e) {
            throw SolverFailure(std::string("valley '") + labels[v] + "': " + e.what(),
                                e.final_residual);
        }
    }

    CombinedSpectrum& spec = set.spectrum;
    spec.reference_energy_ueV = reference;
    for (int v = 0; v < 3; ++v) {
        const EigenSolution& sol = set.solutions[std::size_t(v)];
        for (std::int64_t i = 0; i < std::int64_t(sol.energies_ueV.size()); ++i) {
            SpectrumLevel lvl;
            lvl.energy_GHz = kc::ueV_to_GHz(sol.energies_ueV[std::size_t(i)] - reference);
            lvl.valley = labels[v];
            lvl.index = i;
            spec.levels.push_back(lvl);
        }
    }
    std::stable_sort(spec.levels.begin(), spec.levels.end(),
                     [](const SpectrumLevel& a, const SpectrumLevel& b) {
                         if (a.energy_GHz != b.energy_GHz) return a.energy_GHz < b.energy_GHz;
                         if (a.valley != b.valley) return a.valley < b.valley;
                         return a.index < b.index;
                     });
    spec.count = std::int64_t(spec.levels.size());
    return set;
}

CombinedSpectrum solve_all_valleys(const ScalarField3D& potential, const MaterialParams& material,
                                   std::int64_t per_valley_count, const EigensolverOptions& opts) {
    return solve_valleys_full(potential, material, per_valley_count, opts).spectrum;
}

void CombinedSpectrum::check_invariants() const {
    if (count != std::int64_t(levels.size()))
        throw ComputationFailure("CombinedSpectrum: count mismatch");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i].energy_GHz < levels[i - 1].energy_GHz - 1e-9)
            throw ComputationFailure("CombinedSpectrum: levels not sorted");
}

double level_splitting(const CombinedSpectrum& spectrum, std::int64_t i, std::int64_t j) {
    if (i < 0 || j <= i || j >= spectrum.count)
        throw std::invalid_argument("level_splitting: require 0 <= i < j < count");
    const double d = spectrum.levels[std::size_t(j)].energy_GHz -
                     spectrum.levels[std::size_t(i)].energy_GHz;
    return std::max(d, 0.0);
}

double envelope_at_nv(const EigenSolution& solution, std::int64_t state,
                      const Vec3& nv_position_nm) {
    if (state < 0 || state >= std::int64_t(solution.envelopes.size()))
        throw std::invalid_argument("envelope_at_nv: state index out of range");
    const auto& env = solution.envelopes[std::size_t(state)];
    const double f = env.sample(nv_position_nm);  // nm^-3/2
    return std::sqrt(solution.normalization_Ae[std::size_t(state)]) * f;
}

ScalarField3D resample_field(const ScalarField3D& src, const Grid3D& target) {
    ScalarField3D out(target, src.unit);
    for (std::int64_t k = 0; k < target.counts[2]; ++k)
        for (std::int64_t j = 0; j < target.counts[1]; ++j)
            for (std::int64_t i = 0; i < target.counts[0]; ++i)
                out.at(i, j, k) = src.sample(target.position(i, j, k));
    return out;
}

} // namespace nvscc
