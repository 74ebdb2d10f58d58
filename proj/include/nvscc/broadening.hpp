#ifndef NVSCC_BROADENING_HPP
#define NVSCC_BROADENING_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "nvscc/config.hpp"
#include "nvscc/grid.hpp"

namespace nvscc {

/// Rectangular stand-in for the confining volume used by the
/// electron-phonon channel.
struct SquareWellBox {
    double Lx_nm, Ly_nm, Lz_nm;

    SquareWellBox(double lx, double ly, double lz);
};

/// Two-level-fluctuator noise model: Lorentzian spectrum of corner rate
/// gamma_hop.
struct FluctuatorModel {
    double gamma_hop_Hz;   // charge hopping rate, > 0
    double gamma0_Hz = 0.0;       // attempt rate (informational)
    double trap_energy_Et_eV = 0.0;

    explicit FluctuatorModel(double gamma_hop);
    /// gamma = gamma0 exp(-E_t / k_B T).
    static FluctuatorModel from_attempt_rate(double gamma0_Hz, double Et_eV, double T_K);
};

/// Per-channel linewidths and their total. The `inputs` string is a JSON
/// snapshot of everything the channels were evaluated with.
struct BroadeningReport {
    double gamma_electrode_GHz = 0.0;
    double gamma_ep_GHz = 0.0;
    double gamma_surface_GHz = 0.0;
    double total_phi_GHz = 0.0;
    std::string inputs_json;

    void check_invariants() const;
};

/// Central difference dE1/dV of the first conduction level, GHz/mV, from
/// two full re-solves of the upstream pipeline. `E1_GHz_of_voltage` must
/// re-run potential + eigensolve at the requested electrode voltage.
double conduction_slope(const std::function<double(double)>& E1_GHz_of_voltage, double V0_mV,
                        double dV_mV);

/// Change of the NV level with electrode potential: -e (1 mV)/h in GHz/mV.
double nv_level_slope();

/// Gamma_electrode = |sigma_V (slope_cb - slope_nv)| in GHz for sigma_V in
/// mV and slopes in GHz/mV.
double electrode_broadening(double sigma_V_mV, double slope_cb_GHz_per_mV,
                            double slope_nv_GHz_per_mV);

/// Normalized per-axis square-well overlap (2/L) int_0^L sin(n pi x/L)
/// e^{i k x} sin(pi x/L) dx, evaluated through the closed form with the
/// removable singularities at kL = (n±1) pi handled by series limits.
std::complex<double> well_axis_overlap(std::int64_t n, double kL);

/// Squared phonon-mode overlap G_n(k) = |<n| (c_l/omega) e^{ik r} |1>|^2
/// between box state n = (nx,ny,nz) and the ground state: the full
/// integrand of the golden rule is squared, so the mode normalization
/// c_l/omega enters squared as well. k in 1/m, omega in rad/s.
double ep_mode_overlap(const Vec3& k_per_m, const std::array<std::int64_t, 3>& n,
                       const SquareWellBox& box, double c_l, double omega_rad);

/// Electron-phonon linewidth of the square-well system at temperature T,
/// summed over transitions from the ground state to the lowest `n_levels`
/// box states. Angular k-integrals use a product Gauss rule whose order is
/// doubled until the result moves by < 0.1%; failure to settle throws
/// ComputationFailure. Result in GHz.
double ep_broadening(const SquareWellBox& box, const MaterialParams& material, double T_K,
                     std::int64_t n_levels);

enum class SurfaceRegime { Dipole, Monopole };

/// Variance of the transition-energy shift from surface-trap charge motion
/// [J^2]. sigma are the Gaussian envelope widths, q_z the NV depth. For the
/// dipole regime the trap-pair distance p defaults to sqrt(1/eta); the
/// dipole-pair reduction of the trap count (eta halved) is already folded
/// into the closed-form constant. The monopole prefactor is evaluated
/// linear in eta.
double surface_variance(SurfaceRegime regime, double eta_per_m2, const Vec3& sigma_nm,
                        double q_z_nm, double epsilon_d_F_per_m, double p_nm = 0.0);

/// Redfield linewidth (2 pi / hbar^2) variance S(0) with S(0) = 1/(pi gamma)
/// for the Lorentzian fluctuator spectrum. Returns Hz.
double redfield_linewidth(double variance_J2, const FluctuatorModel& fluctuator);

/// Self-consistent capacitor model of donor-to-trap charge transfer.
/// Returns (occupation in [0.5, 1], capacitor potential in eV). V_ext in mV
/// is added to the Fermi-Dirac argument. Throws ComputationFailure when the
/// root bracket carries no sign change.
std::pair<double, double> trap_occupation(double eta_per_m2, double N_nm, double E_T_eV,
                                          double E_N_eV, double T_K, double V_ext_mV,
                                          double epsilon_d_F_per_m = 5.7 * 8.8541878128e-12);

/// eta_eff = eta (1 - Oc).
double effective_trap_density(double eta_per_m2, double occupation);

/// Assemble the report; total_phi is the plain sum of the three channels.
BroadeningReport total_linewidth(double gamma_electrode_GHz, double gamma_ep_GHz,
                                 double gamma_surface_GHz, std::string inputs_json = "{}");

} // namespace nvscc

#endif
