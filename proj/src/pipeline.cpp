#include "nvscc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"
#include "nvscc/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace nvscc {

namespace kc = constants;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Grid3D potential_grid(const GridSpec& spec) {
    return build_grid(spec.extent, spec.spacing);
}

/// Envelope grid: laterally centered inside the potential domain, top face
/// on the diamond surface (z = 0).
Grid3D envelope_grid(const GridSpec& spec) {
    Grid3D g = build_grid(spec.envelope_extent, spec.envelope_spacing);
    const Grid3D pot = potential_grid(spec);
    const Vec3 pot_ext = pot.extent();
    const Vec3 env_ext = g.extent();
    g.origin = {0.5 * (pot_ext[0] - env_ext[0]), 0.5 * (pot_ext[1] - env_ext[1]), 0.0};
    return g;
}

} // namespace

std::string RunManifest::to_json() const {
    json doc;
    doc["version"] = version;
    doc["config"] = json::parse(config_json);
    doc["stages"] = json::array();
    for (const StageRecord& s : stages) {
        json st;
        st["name"] = s.name;
        st["cache_key"] = s.cache_key;
        st["from_cache"] = s.from_cache;
        st["wall_ms"] = s.wall_ms;
        st["outputs"] = json::object();
        for (const auto& [file, hash] : s.outputs) st["outputs"][file] = hash;
        doc["stages"].push_back(st);
    }
    return doc.dump(2) + "\n";
}

void RunManifest::save(const std::string& path) const {
    io::write_text_atomic(path, to_json());
}

Pipeline::Pipeline(Config config, PipelineOptions options)
    : cfg_(std::move(config)), opts_(std::move(options)) {
    manifest_.version = tool_version;
    manifest_.config_json = cfg_.to_json_text();
    fs::create_directories(opts_.out_dir);
    if (!opts_.cache_dir.empty()) fs::create_directories(opts_.cache_dir);
}

Vec3 Pipeline::nv_position() const {
    const Grid3D pot = potential_grid(cfg_.grid);
    const Vec3 ext = pot.extent();
    return {0.5 * ext[0], 0.5 * ext[1], cfg_.geometry.nv_depth};
}

std::string Pipeline::stage_key(const std::string& stage_name, const std::string& inputs_json,
                                const std::string& upstream_keys) const {
    const std::string blob = std::string(tool_version) + "|" + stage_name + "|" + inputs_json +
                             "|" + upstream_keys;
    return io::hash_hex(io::fnv1a64(blob));
}

bool Pipeline::try_restore(const std::string& stage_name, const std::string& key,
                           const std::vector<std::string>& files) {
    if (opts_.cache_dir.empty()) return false;
    const fs::path dir = fs::path(opts_.cache_dir) / (stage_name + "-" + key);
    if (!fs::exists(dir / "_complete")) return false;
    for (const std::string& f : files) {
        if (!fs::exists(dir / f)) return false;
    }
    for (const std::string& f : files)
        fs::copy_file(dir / f, fs::path(opts_.out_dir) / f, fs::copy_options::overwrite_existing);
    return true;
}

void Pipeline::publish(const std::string& stage_name, const std::string& key,
                       const std::vector<std::string>& files, double wall_ms, bool from_cache) {
    StageRecord rec;
    rec.name = stage_name;
    rec.cache_key = key;
    rec.wall_ms = wall_ms;
    rec.from_cache = from_cache;
    for (const std::string& f : files) {
        const std::string path = (fs::path(opts_.out_dir) / f).string();
        rec.outputs[f] = io::hash_hex(io::hash_file(path));
    }
    if (!opts_.cache_dir.empty() && !from_cache) {
        const fs::path dir = fs::path(opts_.cache_dir) / (stage_name + "-" + key);
        fs::create_directories(dir);
        for (const std::string& f : files)
            fs::copy_file(fs::path(opts_.out_dir) / f, dir / f,
                          fs::copy_options::overwrite_existing);
        io::write_text_atomic((dir / "_complete").string(), key + "\n");
    }
    manifest_.stages.push_back(std::move(rec));
    keys_[stage_name] = key;
}

// ---------------------------------------------------------------------------
// potential stage

void Pipeline::run_potential() {
    if (potential_) return;
    json inputs;
    inputs["electrode_radius"] = cfg_.geometry.electrode_radius;
    inputs["electrode_voltage"] = cfg_.geometry.electrode_voltage;
    inputs["extent"] = vec3_json(cfg_.grid.extent);
    inputs["spacing"] = vec3_json(cfg_.grid.spacing);
    inputs["tol"] = cfg_.solver.poisson_tol;
    inputs["max_iters"] = cfg_.solver.poisson_max_iters;
    const std::string key = stage_key("potential", inputs.dump(), "");
    const std::vector<std::string> files = {"potential.f64", "potential.f64.json",
                                            "profile_V0.csv", "potential_state.json"};

    const double t0 = now_ms();
    if (try_restore("potential", key, files)) {
        potential_ = PotentialSolution{};
        potential_->potential =
            io::read_field((fs::path(opts_.out_dir) / "potential.f64").string());
        const json st = json::parse(
            io::read_text((fs::path(opts_.out_dir) / "potential_state.json").string()));
        potential_->residual = st["residual"].get<double>();
        potential_->iterations = st["iterations"].get<std::int64_t>();
        publish("potential", key, files, now_ms() - t0, true);
        return;
    }

    const Grid3D grid = potential_grid(cfg_.grid);
    potential_ = solve_potential(cfg_.geometry, grid, cfg_.solver.poisson_tol,
                                 cfg_.solver.poisson_max_iters, opts_.threads);

    io::write_field(potential_->potential, (fs::path(opts_.out_dir) / "potential.f64").string());
    const Vec3 nv = nv_position();
    io::CsvWriter profile("depth_nm,potential_mV");
    for (const auto& [depth, mv] : axial_profile(*potential_, nv[0], nv[1]))
        profile.row({depth, mv});
    profile.save((fs::path(opts_.out_dir) / "profile_V0.csv").string());
    json st;
    st["residual"] = potential_->residual;
    st["iterations"] = potential_->iterations;
    io::write_text_atomic((fs::path(opts_.out_dir) / "potential_state.json").string(),
                          st.dump(2) + "\n");
    publish("potential", key, files, now_ms() - t0, false);
}

// ---------------------------------------------------------------------------
// spectrum stage

void Pipeline::run_spectrum() {
    if (spectrum_state_) return;
    run_potential();
    json inputs;
    inputs["m_longitudinal"] = cfg_.material.m_longitudinal;
    inputs["m_transverse"] = cfg_.material.m_transverse;
    inputs["envelope_extent"] = vec3_json(cfg_.grid.envelope_extent);
    inputs["envelope_spacing"] = vec3_json(cfg_.grid.envelope_spacing);
    inputs["per_valley_count"] = cfg_.solver.per_valley_count;
    inputs["tol"] = cfg_.solver.eigensolver_tol;
    inputs["max_iters"] = cfg_.solver.eigensolver_max_iters;
    inputs["seed"] = cfg_.solver.seed;
    inputs["nv_depth"] = cfg_.geometry.nv_depth;
    const std::string key = stage_key("spectrum", inputs.dump(), keys_.at("potential"));
    const std::vector<std::string> files = {"spectrum.csv", "nv_amplitudes.csv",
                                            "envelope_ground.f64", "envelope_ground.f64.json",
                                            "spectrum_state.json"};

    const double t0 = now_ms();
    if (try_restore("spectrum", key, files)) {
        const json st = json::parse(
            io::read_text((fs::path(opts_.out_dir) / "spectrum_state.json").string()));
        SpectrumState state;
        state.spectrum.reference_energy_ueV = st["reference_energy_ueV"].get<double>();
        for (const auto& lvl : st["levels"]) {
            SpectrumLevel l;
            l.energy_GHz = lvl["energy_GHz"].get<double>();
            l.valley = lvl["valley"].get<std::string>();
            l.index = lvl["index"].get<std::int64_t>();
            state.spectrum.levels.push_back(l);
        }
        state.spectrum.count = std::int64_t(state.spectrum.levels.size());
        state.nv_amplitudes = st["nv_amplitudes"].get<std::vector<double>>();
        for (int a = 0; a < 3; ++a) {
            state.ground_moments.sigma_nm[std::size_t(a)] = st["sigma_nm"][std::size_t(a)].get<double>();
            state.ground_moments.center_nm[std::size_t(a)] = st["center_nm"][std::size_t(a)].get<double>();
        }
        state.E1_GHz = st["E1_GHz"].get<double>();
        spectrum_state_ = std::move(state);
        publish("spectrum", key, files, now_ms() - t0, true);
        return;
    }

    const Grid3D env_grid = envelope_grid(cfg_.grid);
    const ScalarField3D pot_env = resample_field(potential_->potential, env_grid);
    EigensolverOptions eopts;
    eopts.tol = cfg_.solver.eigensolver_tol;
    eopts.max_iters = cfg_.solver.eigensolver_max_iters;
    eopts.seed = cfg_.solver.seed;
    eopts.threads = opts_.threads;
    valleys_ = solve_valleys_full(pot_env, cfg_.material, cfg_.solver.per_valley_count, eopts);
    valleys_->spectrum.check_invariants();

    SpectrumState state;
    state.spectrum = valleys_->spectrum;
    const Vec3 nv = nv_position();
    const ConfinedLevels all =
        collect_confined_levels(*valleys_, nv, valleys_->spectrum.count);
    state.nv_amplitudes = all.amplitudes;
    // moments of the merged ground level's envelope
    const SpectrumLevel& g0 = state.spectrum.levels.front();
    const EigenSolution* gsol = nullptr;
    for (const auto& s : valleys_->solutions)
        if (s.valley == g0.valley) gsol = &s;
    state.ground_moments = gaussian_moments(gsol->envelopes[std::size_t(g0.index)]);
    state.E1_GHz = g0.energy_GHz;

    io::CsvWriter spec_csv("index,valley,energy_GHz");
    for (std::size_t i = 0; i < state.spectrum.levels.size(); ++i)
        spec_csv.raw_row(std::to_string(i) + "," + state.spectrum.levels[i].valley + "," +
                         io::format_double(state.spectrum.levels[i].energy_GHz));
    spec_csv.save((fs::path(opts_.out_dir) / "spectrum.csv").string());

    io::CsvWriter amp_csv("index,amplitude");
    for (std::size_t i = 0; i < state.nv_amplitudes.size(); ++i)
        amp_csv.raw_row(std::to_string(i) + "," + io::format_double(state.nv_amplitudes[i]));
    amp_csv.save((fs::path(opts_.out_dir) / "nv_amplitudes.csv").string());

    io::write_field(gsol->envelopes[std::size_t(g0.index)],
                    (fs::path(opts_.out_dir) / "envelope_ground.f64").string());

    json st;
    st["reference_energy_ueV"] = state.spectrum.reference_energy_ueV;
    st["levels"] = json::array();
    for (const auto& l : state.spectrum.levels)
        st["levels"].push_back(
            {{"energy_GHz", l.energy_GHz}, {"valley", l.valley}, {"index", l.index}});
    st["nv_amplitudes"] = state.nv_amplitudes;
    st["sigma_nm"] = vec3_json(state.ground_moments.sigma_nm);
    st["center_nm"] = vec3_json(state.ground_moments.center_nm);
    st["E1_GHz"] = state.E1_GHz;
    io::write_text_atomic((fs::path(opts_.out_dir) / "spectrum_state.json").string(),
                          st.dump(2) + "\n");

    spectrum_state_ = std::move(state);
    publish("spectrum", key, files, now_ms() - t0, false);
}

// ---------------------------------------------------------------------------
// cross-section stage

void Pipeline::run_xsection() {
    if (curve_) return;
    run_spectrum();
    json inputs;
    inputs["phi_GHz"] = cfg_.xsection.phi_GHz;
    inputs["max_levels"] = cfg_.xsection.max_levels;
    inputs["margin_GHz"] = cfg_.xsection.margin_GHz;
    inputs["dos"] = cfg_.material.dos_mass_kg();
    inputs["n"] = cfg_.material.refractive_index_n;
    inputs["ionization_energy"] = cfg_.spectroscopy.ionization_energy;
    const std::string key = stage_key("xsection", inputs.dump(), keys_.at("spectrum"));
    const std::vector<std::string> files = {"fig2_xsection.csv", "xsection_state.json"};

    const double t0 = now_ms();
    if (try_restore("xsection", key, files)) {
        const json st = json::parse(
            io::read_text((fs::path(opts_.out_dir) / "xsection_state.json").string()));
        enhancement_f_ = st["f"].get<double>();
        first_peak_GHz_ = st["first_peak_GHz"].get<double>();
        CrossSectionCurve curve;
        curve.linewidth_phi_GHz = cfg_.xsection.phi_GHz;
        curve.energies_GHz = st["energies_GHz"].get<std::vector<double>>();
        curve.bulk = st["bulk"].get<std::vector<double>>();
        curve.confined = st["confined"].get<std::vector<double>>();
        curve_ = std::move(curve);
        publish("xsection", key, files, now_ms() - t0, true);
        return;
    }

    ConfinedLevels levels;
    const std::int64_t nlev =
        std::min<std::int64_t>(cfg_.xsection.max_levels, spectrum_state_->spectrum.count);
    for (std::int64_t i = 0; i < nlev; ++i) {
        levels.energies_GHz.push_back(spectrum_state_->spectrum.levels[std::size_t(i)].energy_GHz);
        levels.amplitudes.push_back(spectrum_state_->nv_amplitudes[std::size_t(i)]);
    }
    curve_ = build_cross_section_curve(levels, cfg_.xsection.phi_GHz, cfg_.material,
                                       cfg_.spectroscopy, cfg_.xsection.margin_GHz);
    curve_->check_invariants();
    enhancement_f_ = enhancement_factor(*curve_);
    // energy of the first local confined maximum, for the record
    first_peak_GHz_ = 0.0;
    for (std::size_t i = 1; i + 1 < curve_->confined.size(); ++i)
        if (curve_->confined[i] > curve_->confined[i - 1] &&
            curve_->confined[i] >= curve_->confined[i + 1]) {
            first_peak_GHz_ = curve_->energies_GHz[i];
            break;
        }

    io::CsvWriter csv("energy_GHz,bulk,confined");
    for (std::size_t i = 0; i < curve_->energies_GHz.size(); ++i)
        csv.row({curve_->energies_GHz[i], curve_->bulk[i], curve_->confined[i]});
    csv.save((fs::path(opts_.out_dir) / "fig2_xsection.csv").string());

    json st;
    st["f"] = enhancement_f_;
    st["first_peak_GHz"] = first_peak_GHz_;
    st["phi_GHz"] = cfg_.xsection.phi_GHz;
    st["energies_GHz"] = curve_->energies_GHz;
    st["bulk"] = curve_->bulk;
    st["confined"] = curve_->confined;
    io::write_text_atomic((fs::path(opts_.out_dir) / "xsection_state.json").string(),
                          st.dump() + "\n");
    publish("xsection", key, files, now_ms() - t0, false);
}

// ---------------------------------------------------------------------------
// broadening stage

double Pipeline::first_level_at_voltage(double voltage_mV) {
    DeviceGeometry geo = cfg_.geometry;
    geo.electrode_voltage = voltage_mV;
    const Grid3D grid = potential_grid(cfg_.grid);
    const PotentialSolution sol =
        solve_potential(geo, grid, cfg_.solver.poisson_tol, cfg_.solver.poisson_max_iters,
                        opts_.threads);
    const Grid3D env_grid = envelope_grid(cfg_.grid);
    const ScalarField3D pot_env = resample_field(sol.potential, env_grid);
    EigensolverOptions eopts;
    eopts.tol = cfg_.solver.eigensolver_tol;
    eopts.max_iters = cfg_.solver.eigensolver_max_iters;
    eopts.seed = cfg_.solver.seed;
    eopts.threads = opts_.threads;
    const ValleySet set = solve_valleys_full(pot_env, cfg_.material, cfg_.solver.per_valley_count,
                                             eopts, valleys_ ? &*valleys_ : nullptr);

    // persist the perturbed axial profile for the noise figure
    const Vec3 nv = nv_position();
    const std::string tag = (voltage_mV > cfg_.geometry.electrode_voltage) ? "plus" : "minus";
    io::CsvWriter profile("depth_nm,potential_mV");
    for (const auto& [depth, mv] : axial_profile(sol, nv[0], nv[1])) profile.row({depth, mv});
    profile.save((fs::path(opts_.out_dir) / ("profile_V" + tag + ".csv")).string());

    return set.spectrum.levels.front().energy_GHz;
}

void Pipeline::run_broadening() {
    if (report_) return;
    run_spectrum();
    json inputs;
    inputs["sigma_V_mV"] = cfg_.broadening.sigma_V_mV;
    inputs["slope_dV_mV"] = cfg_.broadening.slope_dV_mV;
    inputs["regime"] = cfg_.broadening.regime;
    inputs["ep_box"] = {cfg_.broadening.ep_box_Lx_nm, cfg_.broadening.ep_box_Ly_nm,
                        cfg_.broadening.ep_box_Lz_nm};
    inputs["ep_levels"] = cfg_.broadening.ep_levels;
    inputs["gamma_hop_Hz"] =
        cfg_.broadening.gamma_hop_Hz ? json(*cfg_.broadening.gamma_hop_Hz) : json();
    inputs["surface_sigma_nm"] = cfg_.broadening.surface_sigma_nm
                                     ? vec3_json(*cfg_.broadening.surface_sigma_nm)
                                     : json();
    inputs["geometry"] = {{"trap_density_eta", cfg_.geometry.trap_density_eta},
                          {"donor_depth_N", cfg_.geometry.donor_depth_N},
                          {"trap_energy_ET", cfg_.geometry.trap_energy_ET},
                          {"donor_energy_EN", cfg_.geometry.donor_energy_EN},
                          {"temperature_T", cfg_.geometry.temperature_T},
                          {"nv_depth", cfg_.geometry.nv_depth},
                          {"electrode_voltage", cfg_.geometry.electrode_voltage}};
    inputs["material"] = {{"Theta", cfg_.material.Theta},
                          {"density_rho", cfg_.material.density_rho},
                          {"c_l", cfg_.material.c_l},
                          {"epsilon_d", cfg_.material.epsilon_d}};
    const std::string key = stage_key("broadening", inputs.dump(), keys_.at("spectrum"));
    const std::vector<std::string> files = {"broadening.json", "profile_Vplus.csv",
                                            "profile_Vminus.csv"};

    const double t0 = now_ms();
    if (try_restore("broadening", key, files)) {
        const json st =
            json::parse(io::read_text((fs::path(opts_.out_dir) / "broadening.json").string()));
        BroadeningReport rep;
        rep.gamma_electrode_GHz = st["gamma_electrode_GHz"].get<double>();
        rep.gamma_ep_GHz = st["gamma_ep_GHz"].get<double>();
        rep.gamma_surface_GHz = st["gamma_surface_GHz"].get<double>();
        rep.total_phi_GHz = st["total_phi_GHz"].get<double>();
        rep.inputs_json = st["inputs"].dump();
        slope_GHz_per_mV_ = st["inputs"]["conduction_slope_GHz_per_mV"].get<double>();
        report_ = std::move(rep);
        publish("broadening", key, files, now_ms() - t0, true);
        return;
    }

    // electrode channel: conduction slope from two full re-solves
    const double V0 = cfg_.geometry.electrode_voltage;
    const double dV = cfg_.broadening.slope_dV_mV;
    slope_GHz_per_mV_ = conduction_slope(
        [this](double v) { return first_level_at_voltage(v); }, V0, dV);
    const double slope_nv = nv_level_slope();
    const double gamma_el =
        electrode_broadening(cfg_.broadening.sigma_V_mV, slope_GHz_per_mV_, slope_nv);

    // electron-phonon channel on the square-well stand-in
    const SquareWellBox box(cfg_.broadening.ep_box_Lx_nm, cfg_.broadening.ep_box_Ly_nm,
                            cfg_.broadening.ep_box_Lz_nm);
    const double gamma_ep = ep_broadening(box, cfg_.material, cfg_.geometry.temperature_T,
                                          cfg_.broadening.ep_levels);

    // surface-charge channel with trap-occupation mitigation
    const auto [occupation, cap_potential] = trap_occupation(
        cfg_.geometry.trap_density_eta, cfg_.geometry.donor_depth_N,
        cfg_.geometry.trap_energy_ET, cfg_.geometry.donor_energy_EN,
        cfg_.geometry.temperature_T, cfg_.geometry.electrode_voltage,
        cfg_.material.epsilon_si());
    const double eta_eff = effective_trap_density(cfg_.geometry.trap_density_eta, occupation);
    const Vec3 sigma = cfg_.broadening.surface_sigma_nm ? *cfg_.broadening.surface_sigma_nm
                                                        : spectrum_state_->ground_moments.sigma_nm;
    const SurfaceRegime regime = (cfg_.broadening.regime == "monopole")
                                     ? SurfaceRegime::Monopole
                                     : SurfaceRegime::Dipole;
    double gamma_sc = 0.0;
    double variance = 0.0;
    if (eta_eff > 0.0) {
        variance = surface_variance(regime, eta_eff, sigma, cfg_.geometry.nv_depth,
                                    cfg_.material.epsilon_si());
        if (variance > 0.0) {
            if (!cfg_.broadening.gamma_hop_Hz)
                throw ConfigError("broadening.gamma_hop_Hz",
                                  "required: surface channel is active (eta_eff > 0)");
            gamma_sc =
                redfield_linewidth(variance, FluctuatorModel(*cfg_.broadening.gamma_hop_Hz)) *
                1e-9;  // Hz -> GHz
        }
    }

    json snapshot;
    snapshot["sigma_V_mV"] = cfg_.broadening.sigma_V_mV;
    snapshot["conduction_slope_GHz_per_mV"] = slope_GHz_per_mV_;
    snapshot["nv_level_slope_GHz_per_mV"] = slope_nv;
    snapshot["ep_box_nm"] = {box.Lx_nm, box.Ly_nm, box.Lz_nm};
    snapshot["temperature_T"] = cfg_.geometry.temperature_T;
    snapshot["trap_density_eta"] = cfg_.geometry.trap_density_eta;
    snapshot["eta_eff"] = eta_eff;
    snapshot["occupation"] = occupation;
    snapshot["capacitor_potential_eV"] = cap_potential;
    snapshot["gamma_hop_Hz"] =
        cfg_.broadening.gamma_hop_Hz ? json(*cfg_.broadening.gamma_hop_Hz) : json();
    snapshot["regime"] = cfg_.broadening.regime;
    snapshot["surface_sigma_nm"] = vec3_json(sigma);
    snapshot["q_z_nm"] = cfg_.geometry.nv_depth;
    snapshot["surface_variance_J2"] = variance;

    report_ = total_linewidth(gamma_el, gamma_ep, gamma_sc, snapshot.dump());

    json out;
    out["gamma_electrode_GHz"] = report_->gamma_electrode_GHz;
    out["gamma_ep_GHz"] = report_->gamma_ep_GHz;
    out["gamma_surface_GHz"] = report_->gamma_surface_GHz;
    out["total_phi_GHz"] = report_->total_phi_GHz;
    out["inputs"] = snapshot;
    io::write_text_atomic((fs::path(opts_.out_dir) / "broadening.json").string(),
                          out.dump(2) + "\n");
    publish("broadening", key, files, now_ms() - t0, false);
}

// ---------------------------------------------------------------------------
// metrics stage

void Pipeline::run_metrics() {
    if (metrics_) return;
    run_xsection();
    run_broadening();
    json inputs;
    inputs["delta_D"] = cfg_.spectroscopy.delta_D;
    inputs["g_ratio"] = cfg_.spectroscopy.g_ratio;
    const std::string upstream =
        keys_.at("spectrum") + keys_.at("xsection") + keys_.at("broadening");
    const std::string key = stage_key("metrics", inputs.dump(), upstream);
    const std::vector<std::string> files = {"metrics.json"};

    const double t0 = now_ms();
    if (try_restore("metrics", key, files)) {
        const json st =
            json::parse(io::read_text((fs::path(opts_.out_dir) / "metrics.json").string()));
        SccMetrics m;
        m.delta_C_GHz = st["delta_C_GHz"].get<double>();
        m.delta_D_GHz = st["delta_D_GHz"].get<double>();
        m.delta_E_GHz = st["delta_E_GHz"].get<double>();
        m.phi_GHz = st["phi_GHz"].get<double>();
        m.g = st["g"].get<double>();
        m.f = st["f"].get<double>();
        m.leakage_L = st["leakage_L"].get<double>();
        m.contrast_C = st["contrast_C"].get<double>();
        m.fidelity_F = st["fidelity_F"].get<double>();
        metrics_ = m;
        publish("metrics", key, files, now_ms() - t0, true);
        return;
    }

    const double delta_C = level_splitting(spectrum_state_->spectrum, 0, 1);
    metrics_ = compute_scc_metrics(delta_C, cfg_.spectroscopy.delta_D, report_->total_phi_GHz,
                                   cfg_.spectroscopy.g_ratio, enhancement_f_);
    io::write_text_atomic((fs::path(opts_.out_dir) / "metrics.json").string(),
                          metrics_->to_json());
    publish("metrics", key, files, now_ms() - t0, false);
}

// ---------------------------------------------------------------------------

RunManifest Pipeline::run_until(Stage last) {
    try {
        run_potential();
        if (last != Stage::Potential) {
            run_spectrum();
            if (last == Stage::Xsection) run_xsection();
            if (last == Stage::Broadening) run_broadening();
            if (last == Stage::Metrics) {
                run_metrics();
            }
        }
    } catch (...) {
        manifest_.save((fs::path(opts_.out_dir) / "manifest.json").string());
        throw;
    }
    manifest_.save((fs::path(opts_.out_dir) / "manifest.json").string());
    return manifest_;
}

RunManifest Pipeline::run_all() { return run_until(Stage::Metrics); }

const PotentialSolution& Pipeline::potential() const {
    if (!potential_) throw DependencyError("potential stage has not run");
    return *potential_;
}
const CombinedSpectrum& Pipeline::spectrum() const {
    if (!spectrum_state_) throw DependencyError("spectrum stage has not run");
    return spectrum_state_->spectrum;
}
const CrossSectionCurve& Pipeline::xsection_curve() const {
    if (!curve_) throw DependencyError("xsection stage has not run");
    return *curve_;
}
double Pipeline::enhancement() const {
    if (!curve_) throw DependencyError("xsection stage has not run");
    return enhancement_f_;
}
const BroadeningReport& Pipeline::broadening_report() const {
    if (!report_) throw DependencyError("broadening stage has not run");
    return *report_;
}
const SccMetrics& Pipeline::metrics() const {
    if (!metrics_) throw DependencyError("metrics stage has not run");
    return *metrics_;
}
double Pipeline::conduction_slope_GHz_per_mV() const {
    if (!report_) throw DependencyError("broadening stage has not run");
    return slope_GHz_per_mV_;
}

RunManifest run_pipeline(const std::string& config_path, const PipelineOptions& options) {
    Pipeline p(Config::load(config_path), options);
    return p.run_all();
}

// ---------------------------------------------------------------------------
// figure exports

std::vector<std::string> export_figure_data(const std::string& out_dir,
                                            const std::string& figure) {
    const fs::path dir(out_dir);
    if (!fs::exists(dir / "manifest.json"))
        throw DependencyError("no manifest in '" + out_dir + "': run the pipeline first");
    const json manifest = json::parse(io::read_text((dir / "manifest.json").string()));
    const Config cfg = Config::from_json_text(manifest["config"].dump());

    auto require = [&](const char* file, const char* stage) {
        if (!fs::exists(dir / file))
            throw DependencyError(std::string("missing '") + file + "': run the " + stage +
                                  " stage first");
    };

    std::vector<std::string> written;
    if (figure == "fig2") {
        require("fig2_xsection.csv", "xsection");
        written.push_back((dir / "fig2_xsection.csv").string());
    } else if (figure == "fig4") {
        io::CsvWriter csv("L_nm,depth_nm,gamma_ep_Hz");
        for (double L = 150.0; L <= 400.0 + 1e-9; L += 25.0)
            for (double depth = 50.0; depth <= 150.0 + 1e-9; depth += 10.0) {
                const double ghz = ep_broadening(SquareWellBox(L, L, depth), cfg.material,
                                                 cfg.geometry.temperature_T,
                                                 cfg.broadening.ep_levels);
                csv.row({L, depth, ghz * 1e9});
            }
        const std::string path = (dir / "fig4_ep_sweep.csv").string();
        csv.save(path);
        written.push_back(path);
    } else if (figure == "fig5") {
        io::CsvWriter csv("eta_m2,occupation");
        std::vector<double> etas;
        for (int i = 0; i <= 40; ++i) etas.push_back(std::pow(10.0, 14.0 + 4.0 * i / 40.0));
        for (int i = 0; i <= 30; ++i) etas.push_back(3e15 + 1e14 * i);
        std::sort(etas.begin(), etas.end());
        for (double eta : etas) {
            const auto [occ, v] = trap_occupation(
                eta, cfg.geometry.donor_depth_N, cfg.geometry.trap_energy_ET,
                cfg.geometry.donor_energy_EN, cfg.geometry.temperature_T,
                cfg.geometry.electrode_voltage, cfg.material.epsilon_si());
            csv.row({eta, occ});
        }
        const std::string path = (dir / "fig5_occupation.csv").string();
        csv.save(path);
        written.push_back(path);
    } else if (figure == "profiles") {
        require("profile_V0.csv", "potential");
        written.push_back((dir / "profile_V0.csv").string());
        for (const char* f : {"profile_Vplus.csv", "profile_Vminus.csv"})
            if (fs::exists(dir / f)) written.push_back((dir / f).string());
    } else {
        throw std::invalid_argument("export_figure_data: unknown figure '" + figure +
                                    "' (expected fig2, fig4, fig5 or profiles)");
    }
    return written;
}

} // namespace nvscc
