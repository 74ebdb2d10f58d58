#ifndef NVSCC_CONSTANTS_HPP
#define NVSCC_CONSTANTS_HPP

#include <numbers>

// Physical constants (CODATA 2018, SI) and the fixed unit conventions used
// throughout: lengths in nm, energies internally in micro-eV, spectra
// reported in GHz via E/h.

namespace nvscc::constants {

constexpr double pi = std::numbers::pi_v<double>;

/// e — elementary charge [C].
constexpr double elementary_charge = 1.602176634e-19;

/// h — Planck constant [J s].
constexpr double planck_h = 6.62607015e-34;

/// hbar — reduced Planck constant [J s].
constexpr double hbar = planck_h / (2.0 * pi);

/// k_B — Boltzmann constant [J/K].
constexpr double boltzmann_kB = 1.380649e-23;

/// m_e — electron rest mass [kg].
constexpr double electron_mass = 9.1093837015e-31;

/// eps0 — vacuum permittivity [F/m].
constexpr double vacuum_permittivity = 8.8541878128e-12;

/// mu0 — vacuum permeability [N/A^2].
constexpr double vacuum_permeability = 1.25663706212e-6;

/// Diamond conventional lattice constant [nm]; V_c = a0^3 is the unit-cell
/// volume entering the envelope normalization.
constexpr double diamond_lattice_a0_nm = 0.3567;
constexpr double diamond_cell_volume_nm3 =
    diamond_lattice_a0_nm * diamond_lattice_a0_nm * diamond_lattice_a0_nm;

/// Number of equivalent conduction-band minima in diamond.
constexpr int valley_multiplicity = 6;

// --- unit conversions -----------------------------------------------------

/// 1 GHz expressed in micro-eV: h * 1e9 / e * 1e6.
constexpr double ueV_per_GHz = planck_h * 1.0e9 / elementary_charge * 1.0e6;

constexpr double ueV_to_GHz(double ueV) { return ueV / ueV_per_GHz; }
constexpr double GHz_to_ueV(double ghz) { return ghz * ueV_per_GHz; }

constexpr double joule_to_ueV(double j) { return j / elementary_charge * 1.0e6; }
constexpr double ueV_to_joule(double ueV) { return ueV * elementary_charge * 1.0e-6; }

constexpr double joule_to_GHz(double j) { return j / planck_h * 1.0e-9; }
constexpr double GHz_to_joule(double ghz) { return ghz * 1.0e9 * planck_h; }

constexpr double eV_to_joule(double ev) { return ev * elementary_charge; }

constexpr double nm_to_m(double nm) { return nm * 1.0e-9; }
constexpr double m_to_nm(double m) { return m * 1.0e9; }

} // namespace nvscc::constants

#endif
