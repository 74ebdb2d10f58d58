#include "nvscc/photoionization.hpp"

#include <algorithm>
#include <cmath>

#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"

namespace nvscc {

namespace kc = constants;

namespace {

/// Common normalization 1/(0.5 n sqrt(eps0 mu0 / (hbar omega))) with omega
/// the photoionization laser frequency. Shared by both curves, so it cancels
/// in every ratio.
double common_normalizer(const MaterialParams& material,
                         const SpectroscopyConstants& spectroscopy) {
    const double omega = kc::eV_to_joule(spectroscopy.ionization_energy) / kc::hbar;
    return 1.0 / (0.5 * material.refractive_index_n *
                  std::sqrt(kc::vacuum_permittivity * kc::vacuum_permeability /
                            (kc::hbar * omega)));
}

/// |mu_b C(E) E(E)|^2 placeholder product (unit constants by convention).
double common_factors(const SpectroscopyConstants& s) {
    return s.mu_b * s.mu_b * s.franck_condon_C * s.franck_condon_C * s.laser_field_E *
           s.laser_field_E;
}

} // namespace

double bulk_cross_section(double E_GHz, const MaterialParams& material,
                          const SpectroscopyConstants& spectroscopy) {
    if (E_GHz < 0.0)
        throw std::invalid_argument("bulk_cross_section: energy below threshold");
    const double E = kc::GHz_to_joule(E_GHz);
    const double m = material.dos_mass_kg();
    const double vc = kc::nm_to_m(1.0) * kc::nm_to_m(1.0) * kc::nm_to_m(1.0) *
                      kc::diamond_cell_volume_nm3;  // m^3
    // (V_c / (4 pi hbar)) (2m/hbar^2)^(3/2) sqrt(E), summed over the 6 valleys
    const double dos = std::pow(2.0 * m / (kc::hbar * kc::hbar), 1.5) * std::sqrt(E);
    const double rate = kc::valley_multiplicity * vc / (4.0 * kc::pi * kc::hbar) * dos;
    return rate * common_factors(spectroscopy) * common_normalizer(material, spectroscopy);
}

double confined_cross_section(double E_GHz, const ConfinedLevels& levels, double phi_GHz,
                              const MaterialParams& material,
                              const SpectroscopyConstants& spectroscopy) {
    if (!(phi_GHz > 0.0))
        throw std::invalid_argument("confined_cross_section: phi must be positive");
    if (levels.energies_GHz.empty())
        throw std::invalid_argument("confined_cross_section: empty spectrum");
    const double E = kc::GHz_to_joule(E_GHz);
    const double phi = kc::GHz_to_joule(phi_GHz);
    double sum = 0.0;
    for (std::size_t n = 0; n < levels.energies_GHz.size(); ++n) {
        const double En = kc::GHz_to_joule(levels.energies_GHz[n]);
        const double d = E - En;
        const double lor = (phi / kc::pi) / (d * d + phi * phi);  // unit area in energy
        sum += levels.amplitudes[n] * levels.amplitudes[n] * lor;
    }
    const double rate = 2.0 * kc::pi / kc::hbar * sum;
    return rate * common_factors(spectroscopy) * common_normalizer(material, spectroscopy);
}

ConfinedLevels collect_confined_levels(const ValleySet& valleys, const Vec3& nv_position_nm,
                                       std::int64_t max_levels) {
    ConfinedLevels out;
    const std::int64_t n = std::min<std::int64_t>(max_levels, valleys.spectrum.count);
    for (std::int64_t i = 0; i < n; ++i) {
        const SpectrumLevel& lvl = valleys.spectrum.levels[std::size_t(i)];
        const EigenSolution* sol = nullptr;
        for (const auto& s : valleys.solutions)
            if (s.valley == lvl.valley) { sol = &s; break; }
        if (!sol) throw ComputationFailure("collect_confined_levels: valley not found");
        out.energies_GHz.push_back(lvl.energy_GHz);
        out.amplitudes.push_back(envelope_at_nv(*sol, lvl.index, nv_position_nm));
    }
    return out;
}

CrossSectionCurve build_cross_section_curve(const ConfinedLevels& levels, double phi_GHz,
                                            const MaterialParams& material,
                                            const SpectroscopyConstants& spectroscopy,
                                            double margin_GHz) {
    if (!(phi_GHz > 0.0))
        throw std::invalid_argument("build_cross_section_curve: phi must be positive");
    const double e_max =
        *std::max_element(levels.energies_GHz.begin(), levels.energies_GHz.end()) + margin_GHz;

    std::vector<double> axis;
    const double coarse = std::max(phi_GHz, e_max / 2000.0);
    for (double e = 0.0; e <= e_max; e += coarse) axis.push_back(e);
    axis.push_back(e_max);
    // refine around each peak at phi/10 so maxima resolve to < 1% height error
    for (double En : levels.energies_GHz) {
        const double lo = std::max(0.0, En - 8.0 * phi_GHz);
        const double hi = std::min(e_max, En + 8.0 * phi_GHz);
        for (double e = lo; e <= hi; e += phi_GHz / 10.0) axis.push_back(e);
    }
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               axis.end());

    CrossSectionCurve curve;
    curve.linewidth_phi_GHz = phi_GHz;
    curve.energies_GHz = std::move(axis);
    curve.bulk.reserve(curve.energies_GHz.size());
    curve.confined.reserve(curve.energies_GHz.size());
    for (double e : curve.energies_GHz) {
        curve.bulk.push_back(bulk_cross_section(e, material, spectroscopy));
        curve.confined.push_back(
            confined_cross_section(e, levels, phi_GHz, material, spectroscopy));
    }
    return curve;
}

void CrossSectionCurve::check_invariants() const {
    if (energies_GHz.size() != bulk.size() || bulk.size() != confined.size())
        throw ComputationFailure("CrossSectionCurve: column size mismatch");
    for (double v : confined)
        if (v < 0.0) throw ComputationFailure("CrossSectionCurve: negative confined value");
}

double enhancement_factor(const CrossSectionCurve& curve) {
    const auto& e = curve.energies_GHz;
    const auto& c = curve.confined;
    if (e.size() < 3) throw ComputationFailure("enhancement_factor: curve too short");
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
        if (c[i] > c[i - 1] && c[i] >= c[i + 1]) {
            const double b = curve.bulk[i];
            if (b <= 0.0)
                throw ComputationFailure("enhancement_factor: bulk value vanishes at the peak");
            return c[i] / b;
        }
    }
    throw ComputationFailure("enhancement_factor: no local maximum found");
}

} // namespace nvscc
