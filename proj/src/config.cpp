#include "nvscc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"

using nlohmann::json;

namespace nvscc {

double MaterialParams::epsilon_si() const {
    return epsilon_d * constants::vacuum_permittivity;
}

double MaterialParams::dos_mass_kg() const {
    return std::cbrt(m_longitudinal * m_transverse * m_transverse) *
           constants::electron_mass;
}

void MaterialParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("material.") + name, "must be strictly positive");
    };
    positive(m_longitudinal, "m_longitudinal");
    positive(m_transverse, "m_transverse");
    positive(epsilon_d, "epsilon_d");
    positive(density_rho, "density_rho");
    positive(c_l, "c_l");
    positive(Theta, "Theta");
    positive(refractive_index_n, "refractive_index_n");
}

std::vector<std::string> DeviceGeometry::validate() const {
    std::vector<std::string> notes;
    if (!(nv_depth > 0.0))
        throw ConfigError("geometry.nv_depth", "must be strictly positive");
    if (!(electrode_radius > 0.0))
        throw ConfigError("geometry.electrode_radius", "must be strictly positive");
    if (trap_density_eta < 0.0)
        throw ConfigError("geometry.trap_density_eta", "must be non-negative");
    if (!(temperature_T > 0.0))
        throw ConfigError("geometry.temperature_T", "must be strictly positive");
    if (!(donor_depth_N > 0.0))
        throw ConfigError("geometry.donor_depth_N", "must be strictly positive");
    if (donor_depth_N > nv_depth)
        notes.push_back("geometry: donor layer (" + std::to_string(donor_depth_N) +
                        " nm) sits below the NV (" + std::to_string(nv_depth) + " nm)");
    return notes;
}

void SpectroscopyConstants::validate() const {
    if (!(delta_D > 0.0)) throw ConfigError("spectroscopy.delta_D", "must be strictly positive");
    if (g_ratio < 0.0) throw ConfigError("spectroscopy.g_ratio", "must be non-negative");
    if (!(ionization_energy > 0.0))
        throw ConfigError("spectroscopy.ionization_energy", "must be strictly positive");
}

void GridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (!(spacing[a] > 0.0)) throw ConfigError("grid.spacing", "must be strictly positive");
        if (!(extent[a] > 0.0)) throw ConfigError("grid.extent", "must be strictly positive");
        if (!(envelope_spacing[a] > 0.0))
            throw ConfigError("grid.envelope_spacing", "must be strictly positive");
        if (!(envelope_extent[a] > 0.0))
            throw ConfigError("grid.envelope_extent", "must be strictly positive");
        if (envelope_extent[a] > extent[a] + 1e-9)
            throw ConfigError("grid.envelope_extent", "must fit inside the potential domain");
    }
}

void SolverParams::validate() const {
    if (!(poisson_tol > 0.0)) throw ConfigError("solver.poisson_tol", "must be positive");
    if (!(eigensolver_tol > 0.0)) throw ConfigError("solver.eigensolver_tol", "must be positive");
    if (per_valley_count < 1) throw ConfigError("solver.per_valley_count", "must be >= 1");
    if (poisson_max_iters < 1) throw ConfigError("solver.poisson_max_iters", "must be >= 1");
    if (eigensolver_max_iters < 1) throw ConfigError("solver.eigensolver_max_iters", "must be >= 1");
}

void BroadeningParams::validate() const {
    if (sigma_V_mV < 0.0) throw ConfigError("broadening.sigma_V_mV", "must be non-negative");
    if (!(slope_dV_mV > 0.0)) throw ConfigError("broadening.slope_dV_mV", "must be positive");
    if (regime != "dipole" && regime != "monopole")
        throw ConfigError("broadening.regime", "must be 'dipole' or 'monopole'");
    if (!(ep_box_Lx_nm > 0.0) || !(ep_box_Ly_nm > 0.0) || !(ep_box_Lz_nm > 0.0))
        throw ConfigError("broadening.ep_box", "box dimensions must be positive");
    if (ep_levels < 1) throw ConfigError("broadening.ep_levels", "must be >= 1");
    if (gamma_hop_Hz && !(*gamma_hop_Hz > 0.0))
        throw ConfigError("broadening.gamma_hop_Hz", "must be strictly positive when given");
    if (surface_sigma_nm)
        for (double s : *surface_sigma_nm)
            if (!(s > 0.0)) throw ConfigError("broadening.surface_sigma_nm", "entries must be positive");
}

void XsectionParams::validate() const {
    if (!(phi_GHz > 0.0)) throw ConfigError("xsection.phi_GHz", "must be strictly positive");
    if (max_levels < 1) throw ConfigError("xsection.max_levels", "must be >= 1");
    if (!(margin_GHz > 0.0)) throw ConfigError("xsection.margin_GHz", "must be positive");
}

namespace {

[[noreturn]] void bad_field(const std::string& section, const std::string& key,
                            const std::string& reason) {
    throw ConfigError(section.empty() ? key : section + "." + key, reason);
}

double get_number(const json& obj, const std::string& section, const std::string& key,
                  double fallback, bool* present = nullptr) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        if (present) *present = false;
        return fallback;
    }
    if (present) *present = true;
    const json& v = obj.at(key);
    if (!v.is_number()) bad_field(section, key, "expected a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& section, const std::string& key,
                         std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) bad_field(section, key, "expected an integer");
    return v.get<std::int64_t>();
}

Vec3 get_vec3(const json& obj, const std::string& section, const std::string& key,
              const Vec3& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) bad_field(section, key, "expected an array of 3 numbers");
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
        if (!v[a].is_number()) bad_field(section, key, "expected an array of 3 numbers");
        out[std::size_t(a)] = v[a].get<double>();
    }
    return out;
}

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) bad_field(section, it.key(), "unknown key");
    }
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

} // namespace

Config Config::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("JSON parse failure: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<document>", "top level must be an object");
    check_keys(doc, "", {"material", "geometry", "grid", "spectroscopy", "solver",
                         "broadening", "xsection"});

    Config cfg;
    if (doc.contains("material")) {
        const json& m = doc["material"];
        check_keys(m, "material",
                   {"m_longitudinal", "m_transverse", "epsilon_d", "density_rho", "c_l",
                    "Theta", "refractive_index_n"});
        cfg.material.m_longitudinal = get_number(m, "material", "m_longitudinal", cfg.material.m_longitudinal);
        cfg.material.m_transverse = get_number(m, "material", "m_transverse", cfg.material.m_transverse);
        cfg.material.epsilon_d = get_number(m, "material", "epsilon_d", cfg.material.epsilon_d);
        cfg.material.density_rho = get_number(m, "material", "density_rho", cfg.material.density_rho);
        cfg.material.c_l = get_number(m, "material", "c_l", cfg.material.c_l);
        cfg.material.Theta = get_number(m, "material", "Theta", cfg.material.Theta);
        cfg.material.refractive_index_n = get_number(m, "material", "refractive_index_n", cfg.material.refractive_index_n);
    }
    if (doc.contains("geometry")) {
        const json& g = doc["geometry"];
        check_keys(g, "geometry",
                   {"electrode_radius", "electrode_voltage", "nv_depth", "donor_depth_N",
                    "trap_density_eta", "trap_energy_ET", "donor_energy_EN", "temperature_T"});
        cfg.geometry.electrode_radius = get_number(g, "geometry", "electrode_radius", cfg.geometry.electrode_radius);
        cfg.geometry.electrode_voltage = get_number(g, "geometry", "electrode_voltage", cfg.geometry.electrode_voltage);
        cfg.geometry.nv_depth = get_number(g, "geometry", "nv_depth", cfg.geometry.nv_depth);
        cfg.geometry.donor_depth_N = get_number(g, "geometry", "donor_depth_N", cfg.geometry.donor_depth_N);
        cfg.geometry.trap_density_eta = get_number(g, "geometry", "trap_density_eta", cfg.geometry.trap_density_eta);
        cfg.geometry.trap_energy_ET = get_number(g, "geometry", "trap_energy_ET", cfg.geometry.trap_energy_ET);
        cfg.geometry.donor_energy_EN = get_number(g, "geometry", "donor_energy_EN", cfg.geometry.donor_energy_EN);
        cfg.geometry.temperature_T = get_number(g, "geometry", "temperature_T", cfg.geometry.temperature_T);
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        check_keys(g, "grid", {"extent", "spacing", "envelope_extent", "envelope_spacing"});
        cfg.grid.extent = get_vec3(g, "grid", "extent", cfg.grid.extent);
        cfg.grid.spacing = get_vec3(g, "grid", "spacing", cfg.grid.spacing);
        cfg.grid.envelope_extent = get_vec3(g, "grid", "envelope_extent", cfg.grid.envelope_extent);
        cfg.grid.envelope_spacing = get_vec3(g, "grid", "envelope_spacing", cfg.grid.envelope_spacing);
    }
    if (doc.contains("spectroscopy")) {
        const json& s = doc["spectroscopy"];
        check_keys(s, "spectroscopy",
                   {"delta_D", "g_ratio", "ionization_energy", "mu_b", "franck_condon_C",
                    "laser_field_E"});
        cfg.spectroscopy.delta_D = get_number(s, "spectroscopy", "delta_D", cfg.spectroscopy.delta_D);
        cfg.spectroscopy.g_ratio = get_number(s, "spectroscopy", "g_ratio", cfg.spectroscopy.g_ratio);
        cfg.spectroscopy.ionization_energy = get_number(s, "spectroscopy", "ionization_energy", cfg.spectroscopy.ionization_energy);
        cfg.spectroscopy.mu_b = get_number(s, "spectroscopy", "mu_b", cfg.spectroscopy.mu_b);
        cfg.spectroscopy.franck_condon_C = get_number(s, "spectroscopy", "franck_condon_C", cfg.spectroscopy.franck_condon_C);
        cfg.spectroscopy.laser_field_E = get_number(s, "spectroscopy", "laser_field_E", cfg.spectroscopy.laser_field_E);
    }
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        check_keys(s, "solver",
                   {"poisson_tol", "poisson_max_iters", "eigensolver_tol",
                    "eigensolver_max_iters", "per_valley_count", "seed"});
        cfg.solver.poisson_tol = get_number(s, "solver", "poisson_tol", cfg.solver.poisson_tol);
        cfg.solver.poisson_max_iters = get_integer(s, "solver", "poisson_max_iters", cfg.solver.poisson_max_iters);
        cfg.solver.eigensolver_tol = get_number(s, "solver", "eigensolver_tol", cfg.solver.eigensolver_tol);
        cfg.solver.eigensolver_max_iters = get_integer(s, "solver", "eigensolver_max_iters", cfg.solver.eigensolver_max_iters);
        cfg.solver.per_valley_count = get_integer(s, "solver", "per_valley_count", cfg.solver.per_valley_count);
        cfg.solver.seed = std::uint64_t(get_integer(s, "solver", "seed", std::int64_t(cfg.solver.seed)));
    }
    if (doc.contains("broadening")) {
        const json& b = doc["broadening"];
        check_keys(b, "broadening",
                   {"sigma_V_mV", "slope_dV_mV", "gamma_hop_Hz", "regime", "ep_box_Lx_nm",
                    "ep_box_Ly_nm", "ep_box_Lz_nm", "ep_levels", "surface_sigma_nm"});
        cfg.broadening.sigma_V_mV = get_number(b, "broadening", "sigma_V_mV", cfg.broadening.sigma_V_mV);
        cfg.broadening.slope_dV_mV = get_number(b, "broadening", "slope_dV_mV", cfg.broadening.slope_dV_mV);
        bool have = false;
        const double gamma = get_number(b, "broadening", "gamma_hop_Hz", 0.0, &have);
        if (have) cfg.broadening.gamma_hop_Hz = gamma;
        if (b.contains("regime")) {
            if (!b["regime"].is_string()) bad_field("broadening", "regime", "expected a string");
            cfg.broadening.regime = b["regime"].get<std::string>();
        }
        cfg.broadening.ep_box_Lx_nm = get_number(b, "broadening", "ep_box_Lx_nm", cfg.broadening.ep_box_Lx_nm);
        cfg.broadening.ep_box_Ly_nm = get_number(b, "broadening", "ep_box_Ly_nm", cfg.broadening.ep_box_Ly_nm);
        cfg.broadening.ep_box_Lz_nm = get_number(b, "broadening", "ep_box_Lz_nm", cfg.broadening.ep_box_Lz_nm);
        cfg.broadening.ep_levels = get_integer(b, "broadening", "ep_levels", cfg.broadening.ep_levels);
        if (b.contains("surface_sigma_nm") && !b["surface_sigma_nm"].is_null())
            cfg.broadening.surface_sigma_nm = get_vec3(b, "broadening", "surface_sigma_nm", Vec3{});
    }
    if (doc.contains("xsection")) {
        const json& x = doc["xsection"];
        check_keys(x, "xsection", {"phi_GHz", "max_levels", "margin_GHz"});
        cfg.xsection.phi_GHz = get_number(x, "xsection", "phi_GHz", cfg.xsection.phi_GHz);
        cfg.xsection.max_levels = get_integer(x, "xsection", "max_levels", cfg.xsection.max_levels);
        cfg.xsection.margin_GHz = get_number(x, "xsection", "margin_GHz", cfg.xsection.margin_GHz);
    }

    cfg.material.validate();
    cfg.notes = cfg.geometry.validate();
    cfg.grid.validate();
    cfg.spectroscopy.validate();
    cfg.solver.validate();
    cfg.broadening.validate();
    cfg.xsection.validate();
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string Config::to_json_text() const {
    json doc;
    doc["material"] = {{"m_longitudinal", material.m_longitudinal},
                       {"m_transverse", material.m_transverse},
                       {"epsilon_d", material.epsilon_d},
                       {"density_rho", material.density_rho},
                       {"c_l", material.c_l},
                       {"Theta", material.Theta},
                       {"refractive_index_n", material.refractive_index_n}};
    doc["geometry"] = {{"electrode_radius", geometry.electrode_radius},
                       {"electrode_voltage", geometry.electrode_voltage},
                       {"nv_depth", geometry.nv_depth},
                       {"donor_depth_N", geometry.donor_depth_N},
                       {"trap_density_eta", geometry.trap_density_eta},
                       {"trap_energy_ET", geometry.trap_energy_ET},
                       {"donor_energy_EN", geometry.donor_energy_EN},
                       {"temperature_T", geometry.temperature_T}};
    doc["grid"] = {{"extent", vec3_json(grid.extent)},
                   {"spacing", vec3_json(grid.spacing)},
                   {"envelope_extent", vec3_json(grid.envelope_extent)},
                   {"envelope_spacing", vec3_json(grid.envelope_spacing)}};
    doc["spectroscopy"] = {{"delta_D", spectroscopy.delta_D},
                           {"g_ratio", spectroscopy.g_ratio},
                           {"ionization_energy", spectroscopy.ionization_energy},
                           {"mu_b", spectroscopy.mu_b},
                           {"franck_condon_C", spectroscopy.franck_condon_C},
                           {"laser_field_E", spectroscopy.laser_field_E}};
    doc["solver"] = {{"poisson_tol", solver.poisson_tol},
                     {"poisson_max_iters", solver.poisson_max_iters},
                     {"eigensolver_tol", solver.eigensolver_tol},
                     {"eigensolver_max_iters", solver.eigensolver_max_iters},
                     {"per_valley_count", solver.per_valley_count},
                     {"seed", solver.seed}};
    doc["broadening"] = {{"sigma_V_mV", broadening.sigma_V_mV},
                         {"slope_dV_mV", broadening.slope_dV_mV},
                         {"regime", broadening.regime},
                         {"ep_box_Lx_nm", broadening.ep_box_Lx_nm},
                         {"ep_box_Ly_nm", broadening.ep_box_Ly_nm},
                         {"ep_box_Lz_nm", broadening.ep_box_Lz_nm},
                         {"ep_levels", broadening.ep_levels}};
    if (broadening.gamma_hop_Hz)
        doc["broadening"]["gamma_hop_Hz"] = *broadening.gamma_hop_Hz;
    else
        doc["broadening"]["gamma_hop_Hz"] = nullptr;
    if (broadening.surface_sigma_nm)
        doc["broadening"]["surface_sigma_nm"] = vec3_json(*broadening.surface_sigma_nm);
    else
        doc["broadening"]["surface_sigma_nm"] = nullptr;
    doc["xsection"] = {{"phi_GHz", xsection.phi_GHz},
                       {"max_levels", xsection.max_levels},
                       {"margin_GHz", xsection.margin_GHz}};
    return doc.dump(2);
}

} // namespace nvscc
