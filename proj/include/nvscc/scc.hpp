#ifndef NVSCC_SCC_HPP
#define NVSCC_SCC_HPP

#include <string>

namespace nvscc {

/// Spin-to-charge readout figures of merit and their inputs. The Lorentzian
/// selectivity is evaluated with both arguments in GHz and used as a
/// dimensionless probability weight; that convention is what reproduces the
/// published contrast/fidelity from (0.757, 7.075) GHz.
struct SccMetrics {
    double delta_C_GHz = 0.0;
    double delta_D_GHz = 0.0;
    double delta_E_GHz = 0.0;  // signed delta_C - delta_D; the Lorentzian is even
    double phi_GHz = 0.0;
    double g = 0.0;
    double f = 0.0;
    double leakage_L = 0.0;
    double contrast_C = 0.0;
    double fidelity_F = 0.0;

    void check_invariants() const;
    std::string to_json() const;
};

/// L(dE) = (phi/pi) / (dE^2 + phi^2), GHz convention. phi <= 0 throws.
double selectivity_lorentzian(double delta_E_GHz, double phi_GHz);

/// C = (1 - L) / (1 + L + g/f). f <= 0 throws; L must be >= 0.
double contrast(double L, double g, double f);

/// F = 1 - (L + g/f) / (1 + L + g/f). Same preconditions as contrast.
double readout_fidelity(double L, double g, double f);

/// Assemble the full metrics record from the spectral inputs.
SccMetrics compute_scc_metrics(double delta_C_GHz, double delta_D_GHz, double phi_GHz, double g,
                               double f);

} // namespace nvscc

#endif
