#ifndef NVSCC_PHOTOIONIZATION_HPP
#define NVSCC_PHOTOIONIZATION_HPP

#include <cstdint>
#include <vector>

#include "nvscc/config.hpp"
#include "nvscc/eigensolver.hpp"

namespace nvscc {

/// Bulk and confined transition cross-sections on a shared energy axis
/// (detuning above the photoionization threshold, GHz). The values follow
/// the dimensionless convention: the transition dipole, Franck-Condon
/// factor and laser field are stripped as common factors and both rates
/// are multiplied by 1/(0.5 n sqrt(eps0 mu0 / (hbar omega))).
struct CrossSectionCurve {
    std::vector<double> energies_GHz;
    std::vector<double> bulk;
    std::vector<double> confined;
    double linewidth_phi_GHz = 0.0;

    void check_invariants() const;
};

/// Per-level ingredients for the confined curve.
struct ConfinedLevels {
    std::vector<double> energies_GHz;     // threshold-relative peak positions
    std::vector<double> amplitudes;       // sqrt(A_e) F_n(r_NV), dimensionless
};

/// sqrt(E) bulk cross-section in the dimensionless convention. The mass is
/// the density-of-states mass (m_l m_t^2)^(1/3); the 6-fold valley
/// multiplicity is absorbed into the prefactor. E < 0 throws.
double bulk_cross_section(double E_GHz, const MaterialParams& material,
                          const SpectroscopyConstants& spectroscopy);

/// Lorentzian sum over confined levels, same dimensionless convention.
/// phi <= 0 throws.
double confined_cross_section(double E_GHz, const ConfinedLevels& levels, double phi_GHz,
                              const MaterialParams& material,
                              const SpectroscopyConstants& spectroscopy);

/// Threshold-relative level energies and NV-site amplitudes for the lowest
/// `max_levels` merged levels.
ConfinedLevels collect_confined_levels(const ValleySet& valleys, const Vec3& nv_position_nm,
                                       std::int64_t max_levels);

/// Evaluate both curves on an energy axis resolving every peak to phi/10
/// near the levels and coarser in between.
CrossSectionCurve build_cross_section_curve(const ConfinedLevels& levels, double phi_GHz,
                                            const MaterialParams& material,
                                            const SpectroscopyConstants& spectroscopy,
                                            double margin_GHz = 15.0);

/// Resonant enhancement: confined value at the first local peak maximum
/// divided by the bulk value at the same energy. Throws ComputationFailure
/// when the curve has no local maximum.
double enhancement_factor(const CrossSectionCurve& curve);

} // namespace nvscc

#endif
