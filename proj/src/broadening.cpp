#include "nvscc/broadening.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"

namespace nvscc {

namespace kc = constants;

SquareWellBox::SquareWellBox(double lx, double ly, double lz)
    : Lx_nm(lx), Ly_nm(ly), Lz_nm(lz) {
    if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0))
        throw std::invalid_argument("SquareWellBox: dimensions must be strictly positive");
}

FluctuatorModel::FluctuatorModel(double gamma_hop) : gamma_hop_Hz(gamma_hop) {
    if (!(gamma_hop > 0.0))
        throw std::invalid_argument("FluctuatorModel: gamma_hop must be strictly positive");
}

FluctuatorModel FluctuatorModel::from_attempt_rate(double gamma0_Hz, double Et_eV, double T_K) {
    if (!(gamma0_Hz > 0.0))
        throw std::invalid_argument("FluctuatorModel: gamma0 must be strictly positive");
    if (!(T_K > 0.0)) throw std::invalid_argument("FluctuatorModel: T must be strictly positive");
    const double kT_eV = kc::boltzmann_kB * T_K / kc::elementary_charge;
    FluctuatorModel m(gamma0_Hz * std::exp(-Et_eV / kT_eV));
    m.gamma0_Hz = gamma0_Hz;
    m.trap_energy_Et_eV = Et_eV;
    return m;
}

void BroadeningReport::check_invariants() const {
    if (gamma_electrode_GHz < 0.0 || gamma_ep_GHz < 0.0 || gamma_surface_GHz < 0.0)
        throw ComputationFailure("BroadeningReport: negative channel");
    const double sum = gamma_electrode_GHz + gamma_ep_GHz + gamma_surface_GHz;
    if (std::abs(total_phi_GHz - sum) > 1e-12 * std::max(1.0, sum))
        throw ComputationFailure("BroadeningReport: total is not the channel sum");
}

double conduction_slope(const std::function<double(double)>& E1_GHz_of_voltage, double V0_mV,
                        double dV_mV) {
    if (!(dV_mV > 0.0))
        throw std::invalid_argument("conduction_slope: dV must be strictly positive");
    const double up = E1_GHz_of_voltage(V0_mV + dV_mV);
    const double down = E1_GHz_of_voltage(V0_mV - dV_mV);
    return (up - down) / (2.0 * dV_mV);
}

double nv_level_slope() {
    // -e * (1 mV) / h, expressed in GHz/mV
    return -kc::elementary_charge * 1e-3 / kc::planck_h * 1e-9;
}

double electrode_broadening(double sigma_V_mV, double slope_cb_GHz_per_mV,
                            double slope_nv_GHz_per_mV) {
    if (sigma_V_mV < 0.0)
        throw std::invalid_argument("electrode_broadening: sigma_V must be non-negative");
    return std::abs(sigma_V_mV * (slope_cb_GHz_per_mV - slope_nv_GHz_per_mV));
}

namespace {

/// C_a(u) = i u [(-1)^a e^{iu} - 1] / (a^2 pi^2 - u^2), the building block
/// of the well overlap; removable singularities at u = ±a pi.
std::complex<double> c_term(std::int64_t a, double u) {
    const double api = double(a) * kc::pi;
    if (u < 0.0) return std::conj(c_term(a, -u));
    const double eps = u - api;
    const double window = 1e-6 * std::max(1.0, api);
    if (std::abs(eps) < window) {
        // series limit: C_a = (api+eps)/(2 api+eps) (1 + i eps/2 - eps^2/6 - i eps^3/24)
        const std::complex<double> bracket(1.0 - eps * eps / 6.0,
                                           eps / 2.0 - eps * eps * eps / 24.0);
        const double ratio = (a == 0) ? 1.0 : (api + eps) / (2.0 * api + eps);
        return ratio * bracket;
    }
    const std::complex<double> iu(0.0, u);
    const double sign = (a % 2 == 0) ? 1.0 : -1.0;
    const std::complex<double> phase = sign * std::exp(std::complex<double>(0.0, u)) - 1.0;
    return iu * phase / (api * api - u * u);
}

} // namespace

std::complex<double> well_axis_overlap(std::int64_t n, double kL) {
    if (n < 1) throw std::invalid_argument("well_axis_overlap: n must be >= 1");
    // sin(n t) sin(t) = [cos((n-1)t) - cos((n+1)t)]/2 turns the per-axis
    // integral into the difference of two c_terms
    return c_term(n - 1, kL) - c_term(n + 1, kL);
}

double ep_mode_overlap(const Vec3& k_per_m, const std::array<std::int64_t, 3>& n,
                       const SquareWellBox& box, double c_l, double omega_rad) {
    if (n[0] < 1 || n[1] < 1 || n[2] < 1)
        throw std::invalid_argument("ep_mode_overlap: quantum numbers must be >= 1");
    if (!(omega_rad > 0.0))
        throw std::invalid_argument("ep_mode_overlap: omega must be strictly positive");
    const double L[3] = {kc::nm_to_m(box.Lx_nm), kc::nm_to_m(box.Ly_nm), kc::nm_to_m(box.Lz_nm)};
    std::complex<double> M(1.0, 0.0);
    for (int a = 0; a < 3; ++a) M *= well_axis_overlap(n[std::size_t(a)], k_per_m[std::size_t(a)] * L[a]);
    const double amp = c_l / omega_rad;  // dilational mode normalization, squared below
    return amp * amp * std::norm(M);
}

namespace {

struct BoxLevel {
    std::array<std::int64_t, 3> n;
    double energy_J;
};

/// Lowest `count` particle-in-a-box levels for the ground-valley mass
/// orientation (transverse in-plane, longitudinal along z).
std::vector<BoxLevel> box_levels(const SquareWellBox& box, const MaterialParams& mat,
                                 std::int64_t count) {
    const double mx = mat.m_transverse * kc::electron_mass;
    const double my = mat.m_transverse * kc::electron_mass;
    const double mz = mat.m_longitudinal * kc::electron_mass;
    const double lx = kc::nm_to_m(box.Lx_nm), ly = kc::nm_to_m(box.Ly_nm),
                 lz = kc::nm_to_m(box.Lz_nm);
    const double h2_8 = kc::planck_h * kc::planck_h / 8.0;
    auto level_energy = [&](std::int64_t nx, std::int64_t ny, std::int64_t nz) {
        return h2_8 * (double(nx * nx) / (mx * lx * lx) + double(ny * ny) / (my * ly * ly) +
                       double(nz * nz) / (mz * lz * lz));
    };
    const std::int64_t nmax = 12;
    std::vector<BoxLevel> levels;
    for (std::int64_t nx = 1; nx <= nmax; ++nx)
        for (std::int64_t ny = 1; ny <= nmax; ++ny)
            for (std::int64_t nz = 1; nz <= nmax; ++nz)
                levels.push_back({{nx, ny, nz}, level_energy(nx, ny, nz)});
    std::sort(levels.begin(), levels.end(), [](const BoxLevel& a, const BoxLevel& b) {
        if (a.energy_J != b.energy_J) return a.energy_J < b.energy_J;
        return a.n < b.n;
    });
    levels.resize(std::size_t(std::min<std::int64_t>(count, std::int64_t(levels.size()))));
    return levels;
}

/// Angular integral of G_n over the unit sphere at fixed |k|, product
/// Gauss-Legendre in cos(theta) x trapezoid in phi.
double angular_integral(const std::array<std::int64_t, 3>& n, const SquareWellBox& box,
                        double c_l, double omega, double k_abs, int order) {
    // Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration
    std::vector<double> x(std::size_t(order), 0.0), w(std::size_t(order), 0.0);
    for (int i = 0; i < order; ++i) {
        double t = std::cos(kc::pi * (i + 0.75) / (order + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int l = 2; l <= order; ++l) {
                const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            const double dp = order * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int l = 2; l <= order; ++l) {
            const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
            p0 = p1;
            p1 = p2;
        }
        const double dp = order * (t * p1 - p0) / (t * t - 1.0);
        x[std::size_t(i)] = t;
        w[std::size_t(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    const int nphi = 2 * order;
    const double dphi = 2.0 * kc::pi / nphi;
    double total = 0.0;
    for (int i = 0; i < order; ++i) {
        const double ct = x[std::size_t(i)];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        double ring = 0.0;
        for (int j = 0; j < nphi; ++j) {
            const double phi = dphi * j;
            const Vec3 k{k_abs * st * std::cos(phi), k_abs * st * std::sin(phi), k_abs * ct};
            ring += ep_mode_overlap(k, n, box, c_l, omega);
        }
        total += w[std::size_t(i)] * ring * dphi;
    }
    return total;
}

} // namespace

double ep_broadening(const SquareWellBox& box, const MaterialParams& material, double T_K,
                     std::int64_t n_levels) {
    if (n_levels < 1) throw std::invalid_argument("ep_broadening: n_levels must be >= 1");
    if (!(T_K > 0.0)) throw std::invalid_argument("ep_broadening: T must be strictly positive");

    const std::vector<BoxLevel> levels = box_levels(box, material, n_levels);
    const double theta_J = kc::eV_to_joule(material.Theta);
    const double rho = material.density_rho;
    const double c_l = material.c_l;
    const double alpha = theta_J * theta_J /
                         (2.0 * std::pow(2.0 * kc::pi, 2) * kc::hbar * rho *
                          std::pow(c_l, 4));

    double gamma = 0.0;  // 1/s
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const double dE = levels[i].energy_J - levels[0].energy_J;
        if (dE <= 0.0) continue;
        const double omega = dE / kc::hbar;      // rad/s
        const double k_abs = omega / c_l;        // 1/m
        const double x = kc::hbar * omega / (kc::boltzmann_kB * T_K);
        const double n_bose = 1.0 / std::expm1(x);

        int order = 8;
        double prev = angular_integral(levels[i].n, box, c_l, omega, k_abs, order);
        double cur = prev;
        bool settled = false;
        while (order <= 256) {
            order *= 2;
            cur = angular_integral(levels[i].n, box, c_l, omega, k_abs, order);
            if (std::abs(cur - prev) <= 1e-3 * std::max(std::abs(cur), 1e-300)) {
                settled = true;
                break;
            }
            prev = cur;
        }
        if (!settled)
            throw ComputationFailure("ep_broadening: angular quadrature did not converge");

        // alpha/c_l^3 sum omega^5 n_B G with G carrying (c_l/omega)^2
        gamma += alpha / std::pow(c_l, 3) * std::pow(omega, 5) * n_bose * cur;
    }
    return gamma * 1e-9;  // Hz -> GHz
}

double surface_variance(SurfaceRegime regime, double eta_per_m2, const Vec3& sigma_nm,
                        double q_z_nm, double epsilon_d_F_per_m, double p_nm) {
    if (!(q_z_nm > 0.0))
        throw std::invalid_argument("surface_variance: q_z must be strictly positive");
    if (eta_per_m2 < 0.0)
        throw std::invalid_argument("surface_variance: eta must be non-negative");
    if (eta_per_m2 == 0.0) return 0.0;

    const double sx = kc::nm_to_m(sigma_nm[0]), sy = kc::nm_to_m(sigma_nm[1]),
                 sz = kc::nm_to_m(sigma_nm[2]);
    const double qz = kc::nm_to_m(q_z_nm);
    const double e4 = std::pow(kc::elementary_charge, 4);
    const double s2x = sx * sx, s2y = sy * sy, s2z = sz * sz;
    const double alpha = 3.0 * s2x * s2x + 2.0 * s2x * s2y;
    const double beta = 3.0 * s2y * s2y - 8.0 * (s2x + s2y) * s2z + 8.0 * s2z * s2z;
    const double ab = alpha + beta;

    if (regime == SurfaceRegime::Dipole) {
        const double p = (p_nm > 0.0) ? kc::nm_to_m(p_nm) : std::sqrt(1.0 / eta_per_m2);
        return 15.0 * p * p * e4 * eta_per_m2 * ab /
               (8192.0 * kc::pi * std::pow(qz, 6) * epsilon_d_F_per_m * epsilon_d_F_per_m);
    }
    // monopole: eta e^4 / (4 pi eps)^2 * 3 pi (alpha+beta) / (128 qz^4)
    const double pref = eta_per_m2 * e4 /
                        std::pow(4.0 * kc::pi * epsilon_d_F_per_m, 2);
    return pref * 3.0 * kc::pi * ab / (128.0 * std::pow(qz, 4));
}

double redfield_linewidth(double variance_J2, const FluctuatorModel& fluctuator) {
    if (!(fluctuator.gamma_hop_Hz > 0.0))
        throw std::invalid_argument("redfield_linewidth: gamma_hop must be strictly positive");
    if (variance_J2 < 0.0)
        throw std::invalid_argument("redfield_linewidth: variance must be non-negative");
    const double s0 = 1.0 / (kc::pi * fluctuator.gamma_hop_Hz);
    return 2.0 * kc::pi / (kc::hbar * kc::hbar) * variance_J2 * s0;
}

std::pair<double, double> trap_occupation(double eta_per_m2, double N_nm, double E_T_eV,
                                          double E_N_eV, double T_K, double V_ext_mV,
                                          double epsilon_d_F_per_m) {
    if (!(eta_per_m2 > 0.0))
        throw std::invalid_argument("trap_occupation: eta must be strictly positive");
    if (!(N_nm > 0.0))
        throw std::invalid_argument("trap_occupation: N must be strictly positive");
    if (!(T_K > 0.0))
        throw std::invalid_argument("trap_occupation: T must be strictly positive");

    const double kT_eV = kc::boltzmann_kB * T_K / kc::elementary_charge;
    const double offset_eV = E_T_eV - E_N_eV + V_ext_mV * 1e-3;
    // parallel-plate: C = eps_d / N; full-transfer potential e eta N / eps_d
    const double c_volts =
        kc::elementary_charge * eta_per_m2 * kc::nm_to_m(N_nm) / epsilon_d_F_per_m;

    auto fermi = [&](double V_eV) {
        const double x = std::clamp((offset_eV + V_eV) / kT_eV, -700.0, 700.0);
        return 1.0 / (1.0 + std::exp(x));
    };
    // eta = (eps_d V)/(e N) f(...)  <=>  V = c f(V); solve g(V) = c f(V) - V
    auto g = [&](double V_eV) { return c_volts * fermi(V_eV) - V_eV; };

    double lo = 0.0, hi = c_volts * (1.0 + 1e-12) + 1e-300;
    double glo = g(lo), ghi = g(hi);
    if (glo < 0.0 || ghi > 0.0)
        throw ComputationFailure("trap_occupation: no sign change in bracket [g(" +
                                 std::to_string(lo) + ")=" + std::to_string(glo) + ", g(" +
                                 std::to_string(hi) + ")=" + std::to_string(ghi) + "]");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm >= 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-18 * std::max(1.0, hi)) break;
    }
    const double V = 0.5 * (lo + hi);
    const double occ = 0.5 * (1.0 + fermi(V));
    return {occ, V};
}

double effective_trap_density(double eta_per_m2, double occupation) {
    if (occupation < 0.0 || occupation > 1.0)
        throw std::invalid_argument("effective_trap_density: occupation must be in [0, 1]");
    if (eta_per_m2 < 0.0)
        throw std::invalid_argument("effective_trap_density: eta must be non-negative");
    return eta_per_m2 * (1.0 - occupation);
}

BroadeningReport total_linewidth(double gamma_electrode_GHz, double gamma_ep_GHz,
                                 double gamma_surface_GHz, std::string inputs_json) {
    BroadeningReport r;
    r.gamma_electrode_GHz = gamma_electrode_GHz;
    r.gamma_ep_GHz = gamma_ep_GHz;
    r.gamma_surface_GHz = gamma_surface_GHz;
    r.total_phi_GHz = gamma_electrode_GHz + gamma_ep_GHz + gamma_surface_GHz;
    r.inputs_json = std::move(inputs_json);
    r.check_invariants();
    return r;
}

} // namespace nvscc
