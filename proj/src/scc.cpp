#include "nvscc/scc.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"
#include "nvscc/io.hpp"

namespace nvscc {

double selectivity_lorentzian(double delta_E_GHz, double phi_GHz) {
    if (!(phi_GHz > 0.0))
        throw std::invalid_argument("selectivity_lorentzian: phi must be strictly positive");
    return (phi_GHz / constants::pi) / (delta_E_GHz * delta_E_GHz + phi_GHz * phi_GHz);
}

double contrast(double L, double g, double f) {
    if (!(f > 0.0)) throw std::invalid_argument("contrast: f must be strictly positive");
    if (L < 0.0) throw std::invalid_argument("contrast: L must be non-negative");
    if (g < 0.0) throw std::invalid_argument("contrast: g must be non-negative");
    return (1.0 - L) / (1.0 + L + g / f);
}

double readout_fidelity(double L, double g, double f) {
    if (!(f > 0.0)) throw std::invalid_argument("readout_fidelity: f must be strictly positive");
    if (L < 0.0) throw std::invalid_argument("readout_fidelity: L must be non-negative");
    if (g < 0.0) throw std::invalid_argument("readout_fidelity: g must be non-negative");
    const double gf = g / f;
    return 1.0 - (L + gf) / (1.0 + L + gf);
}

SccMetrics compute_scc_metrics(double delta_C_GHz, double delta_D_GHz, double phi_GHz, double g,
                               double f) {
    SccMetrics m;
    m.delta_C_GHz = delta_C_GHz;
    m.delta_D_GHz = delta_D_GHz;
    m.delta_E_GHz = delta_C_GHz - delta_D_GHz;
    m.phi_GHz = phi_GHz;
    m.g = g;
    m.f = f;
    m.leakage_L = selectivity_lorentzian(m.delta_E_GHz, phi_GHz);
    m.contrast_C = contrast(m.leakage_L, g, f);
    m.fidelity_F = readout_fidelity(m.leakage_L, g, f);
    m.check_invariants();
    return m;
}

void SccMetrics::check_invariants() const {
    if (std::abs(delta_E_GHz - (delta_C_GHz - delta_D_GHz)) > 1e-12)
        throw ComputationFailure("SccMetrics: delta_E != delta_C - delta_D");
    if (leakage_L >= 0.0 && g >= 0.0 && f > 0.0) {
        if (!(contrast_C >= -1e-15 && contrast_C <= fidelity_F + 1e-15 &&
              fidelity_F <= 1.0 + 1e-15))
            throw ComputationFailure("SccMetrics: ordering 0 <= C <= F <= 1 violated");
    }
}

std::string SccMetrics::to_json() const {
    std::ostringstream os;
    os << "{\n";
    os << "  \"delta_C_GHz\": " << io::format_double(delta_C_GHz) << ",\n";
    os << "  \"delta_D_GHz\": " << io::format_double(delta_D_GHz) << ",\n";
    os << "  \"delta_E_GHz\": " << io::format_double(delta_E_GHz) << ",\n";
    os << "  \"phi_GHz\": " << io::format_double(phi_GHz) << ",\n";
    os << "  \"g\": " << io::format_double(g) << ",\n";
    os << "  \"f\": " << io::format_double(f) << ",\n";
    os << "  \"leakage_L\": " << io::format_double(leakage_L) << ",\n";
    os << "  \"contrast_C\": " << io::format_double(contrast_C) << ",\n";
    os << "  \"fidelity_F\": " << io::format_double(fidelity_F) << "\n";
    os << "}\n";
    return os.str();
}

} // namespace nvscc
