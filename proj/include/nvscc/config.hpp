#ifndef NVSCC_CONFIG_HPP
#define NVSCC_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "nvscc/grid.hpp"

namespace nvscc {

/// Diamond material constants. Defaults are standard literature values;
/// the config file may override any of them.
struct MaterialParams {
    double m_longitudinal = 1.40;   // units of electron mass
    double m_transverse = 0.36;     // units of electron mass
    double epsilon_d = 5.7;         // relative; applied as eps_d = eps_r * eps0
    double density_rho = 3515.0;    // kg/m^3
    double c_l = 17500.0;           // longitudinal sound speed, m/s
    double Theta = 8.7;             // acoustic deformation potential, eV
    double refractive_index_n = 2.41;

    /// eps_r * eps0 [F/m].
    double epsilon_si() const;
    /// Density-of-states mass (m_l * m_t^2)^(1/3) in kg.
    double dos_mass_kg() const;
    void validate() const;
};

/// Electrode/device geometry and surface-trap system.
struct DeviceGeometry {
    double electrode_radius = 150.0;  // nm
    double electrode_voltage = 10.0;  // mV
    double nv_depth = 50.0;           // nm below surface (q_z of the noise model)
    double donor_depth_N = 100.0;     // nm below surface
    double trap_density_eta = 1.0e15; // m^-2
    double trap_energy_ET = -3.05;    // eV
    double donor_energy_EN = -1.71;   // eV
    double temperature_T = 4.0;       // K

    /// Validates; returns human-readable notes for permitted-but-flagged
    /// combinations (donor layer below the NV).
    std::vector<std::string> validate() const;
};

/// NV spectroscopy constants. mu_b, franck_condon_C and laser_field_E are
/// symbolic unit placeholders; they cancel in every dimensionless ratio and
/// stay at 1.
struct SpectroscopyConstants {
    double delta_D = 2.87;         // GHz, ground-state splitting
    double g_ratio = 0.4;          // absorption/ionization ratio
    double ionization_energy = 2.6; // eV
    double mu_b = 1.0;
    double franck_condon_C = 1.0;
    double laser_field_E = 1.0;

    void validate() const;
};

/// Grid specification: the potential is solved on the full domain, the
/// envelope eigenproblem on a (typically finer, shallower) subdomain whose
/// top face coincides with the diamond surface.
struct GridSpec {
    Vec3 extent{1000.0, 1000.0, 500.0};          // nm, potential domain
    Vec3 spacing{5.0, 5.0, 2.5};                 // nm
    Vec3 envelope_extent{700.0, 700.0, 160.0};   // nm
    Vec3 envelope_spacing{5.0, 5.0, 2.0};        // nm

    void validate() const;
};

struct SolverParams {
    double poisson_tol = 1e-8;       // relative residual
    std::int64_t poisson_max_iters = 20000;
    double eigensolver_tol = 1e-8;   // residual relative to operator scale
    std::int64_t eigensolver_max_iters = 2500;
    std::int64_t per_valley_count = 6;
    std::uint64_t seed = 20240901;

    void validate() const;
};

struct BroadeningParams {
    double sigma_V_mV = 0.001;       // electrode RMS voltage noise
    double slope_dV_mV = 0.001;      // central-difference step for the slope
    std::optional<double> gamma_hop_Hz; // required whenever Gamma_sc != 0
    std::string regime = "dipole";   // "dipole" or "monopole"
    double ep_box_Lx_nm = 250.0;     // square-well stand-in for e-p channel
    double ep_box_Ly_nm = 250.0;
    double ep_box_Lz_nm = 100.0;
    std::int64_t ep_levels = 18;
    /// Explicit envelope sigmas for the surface-charge channel; when absent
    /// the pipeline uses gaussian_moments of the computed ground envelope.
    std::optional<Vec3> surface_sigma_nm;

    void validate() const;
};

struct XsectionParams {
    double phi_GHz = 1.0;        // Lorentzian linewidth for the curves
    std::int64_t max_levels = 12; // confined levels included in the curve
    double margin_GHz = 15.0;    // energy-axis margin beyond the last peak

    void validate() const;
};

struct Config {
    MaterialParams material;
    DeviceGeometry geometry;
    GridSpec grid;
    SpectroscopyConstants spectroscopy;
    SolverParams solver;
    BroadeningParams broadening;
    XsectionParams xsection;

    /// Validation notes (non-fatal) collected while loading.
    std::vector<std::string> notes;

    /// Parse and validate a JSON config document. Unknown keys and
    /// wrong-typed or out-of-range values raise ConfigError naming the field.
    static Config from_json_text(const std::string& text);
    static Config load(const std::string& path);

    /// Canonical JSON snapshot of every resolved value (sorted keys); used
    /// for the run manifest and cache keys.
    std::string to_json_text() const;
};

} // namespace nvscc

#endif
