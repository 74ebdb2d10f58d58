#ifndef NVSCC_EIGENSOLVER_HPP
#define NVSCC_EIGENSOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nvscc/config.hpp"
#include "nvscc/grid.hpp"

namespace nvscc {

/// One valley orientation's diagonal effective-mass tensor, in units of the
/// electron mass.
struct MassTensor {
    double m_x, m_y, m_z;

    MassTensor(double mx, double my, double mz);
};

/// Matrix-free 7-point discretization of
///   -(hbar^2/2) div(1/m grad) + U(r)
/// on a structured grid with homogeneous Dirichlet (F = 0) boundaries.
/// Energies are in micro-eV throughout. The operator is symmetric by
/// construction; vectors live in the subspace with zero boundary entries.
class HamiltonianOperator {
public:
    /// U in micro-eV per node.
    HamiltonianOperator(const Grid3D& grid, std::vector<double> potential_energy_ueV,
                        const MassTensor& mass);

    /// y = H x. Vectors are full-grid flat arrays; boundary entries of y are
    /// set to zero.
    void apply(const double* x, double* y, int threads = 1) const;

    /// Kinetic coefficient hbar^2/(2 m_a da^2) per axis [micro-eV].
    Vec3 kinetic_coefficients() const { return {cx_, cy_, cz_}; }
    const Grid3D& grid() const { return grid_; }
    const std::vector<double>& potential_energy() const { return u_; }
    std::int64_t dimension() const { return grid_.node_count(); }

    /// Gershgorin bounds on the spectrum [micro-eV].
    double upper_bound() const;
    double lower_bound() const;

private:
    Grid3D grid_;
    std::vector<double> u_;
    double cx_, cy_, cz_;
};

/// Build the Hamiltonian from an electric potential field (volts):
/// electron potential energy is -e V(r), so a positive electrode voltage
/// confines. Grid/potential mismatch throws std::invalid_argument.
HamiltonianOperator assemble_hamiltonian(const Grid3D& grid, const ScalarField3D& potential,
                                         const MassTensor& mass);

/// One valley's eigenpairs. Energies are the raw operator eigenvalues
/// (micro-eV, relative to the Bloch band reference; they include the -eV
/// potential term). Envelopes are L2-normalized on the grid,
/// sum |F|^2 dV = 1 with F in nm^-3/2, making the nanostructure
/// normalization constant A_e equal to the unit-cell volume V_c.
struct EigenSolution {
    std::string valley;                  // "x", "y" or "z"
    std::vector<double> energies_ueV;    // ascending
    std::vector<ScalarField3D> envelopes;
    std::vector<double> normalization_Ae; // nm^3, = V_c per state
    std::vector<double> residuals;        // ||H F - E F|| / ||F|| in micro-eV

    void check_invariants(double residual_tol_ueV) const;
};

struct EigensolverOptions {
    double tol = 1e-8;              // residual tolerance relative to the spectrum scale
    std::int64_t max_iters = 2500;  // total operator applications per column
    std::uint64_t seed = 20240901;
    int threads = 1;
    const EigenSolution* warm_start = nullptr;
};

/// Lowest `count` eigenpairs of H by Chebyshev-filtered subspace iteration
/// with deterministic seeded start vectors. Throws SolverFailure with the
/// worst residual on stagnation.
EigenSolution lowest_eigenpairs(const HamiltonianOperator& H, std::int64_t count,
                                const EigensolverOptions& opts = {});

/// A single merged conduction level.
struct SpectrumLevel {
    double energy_GHz;  // relative to the confined band edge (see below)
    std::string valley;
    std::int64_t index; // index within the valley's solution
};

/// Merged, sorted 3-valley spectrum. Energies are reported relative to the
/// minimum of the electron potential energy over the grid (the confined
/// band edge, -e max V), which makes them the detunings above the local
/// photoionization threshold and keeps them positive.
struct CombinedSpectrum {
    std::vector<SpectrumLevel> levels;
    std::int64_t count = 0;
    double reference_energy_ueV = 0.0; // min potential energy (raw scale)

    void check_invariants() const;
};

/// The three per-valley solutions plus the merged spectrum.
struct ValleySet {
    std::vector<EigenSolution> solutions; // order: valley "x", "y", "z"
    CombinedSpectrum spectrum;
};

/// Solve the three valley orientations (m_l,m_t,m_t), (m_t,m_l,m_t),
/// (m_t,m_t,m_l) on the given potential (volts) and merge. Ties in the
/// sort are broken by the fixed valley label order x < y < z. An optional
/// previous ValleySet on the same grid seeds the start vectors.
ValleySet solve_valleys_full(const ScalarField3D& potential, const MaterialParams& material,
                             std::int64_t per_valley_count,
                             const EigensolverOptions& opts = {},
                             const ValleySet* warm_start = nullptr);

/// Spec-surface wrapper returning just the merged spectrum.
CombinedSpectrum solve_all_valleys(const ScalarField3D& potential,
                                   const MaterialParams& material,
                                   std::int64_t per_valley_count,
                                   const EigensolverOptions& opts = {});

/// energies[j] - energies[i] in GHz, requires i < j < count.
double level_splitting(const CombinedSpectrum& spectrum, std::int64_t i, std::int64_t j);

/// sqrt(A_e) * F_state interpolated at the NV position; dimensionless.
/// Throws std::invalid_argument for positions outside the grid.
double envelope_at_nv(const EigenSolution& solution, std::int64_t state, const Vec3& nv_position_nm);

/// Resample a potential field onto another grid by trilinear interpolation;
/// the target grid must lie inside the source grid.
ScalarField3D resample_field(const ScalarField3D& src, const Grid3D& target);

} // namespace nvscc

#endif
