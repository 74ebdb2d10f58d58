#ifndef NVSCC_PIPELINE_HPP
#define NVSCC_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvscc/broadening.hpp"
#include "nvscc/config.hpp"
#include "nvscc/electrostatics.hpp"
#include "nvscc/eigensolver.hpp"
#include "nvscc/photoionization.hpp"
#include "nvscc/scc.hpp"

namespace nvscc {

inline constexpr const char* tool_version = "nvscc 0.1.0";

/// Per-stage record in the run manifest.
struct StageRecord {
    std::string name;
    std::string cache_key;                         // hex of the input hash chain
    std::map<std::string, std::string> outputs;    // file name -> content hash
    double wall_ms = 0.0;
    bool from_cache = false;
};

/// Full account of one pipeline run: resolved config, stage checksums,
/// output inventory. Re-running with an identical config reproduces
/// identical hashes.
struct RunManifest {
    std::string version;
    std::string config_json;
    std::vector<StageRecord> stages;

    std::string to_json() const;
    void save(const std::string& path) const;
};

struct PipelineOptions {
    std::string out_dir = ".";
    std::string cache_dir;  // empty: no cross-run stage cache
    int threads = 1;
};

enum class Stage { Potential, Spectrum, Xsection, Broadening, Metrics };

/// Orchestrates the stage chain potential -> spectrum -> cross-sections ->
/// broadening -> metrics over one configuration. Stages persist their
/// artifacts into out_dir; with a cache_dir, completed stages are reused
/// across runs keyed by the hash chain of their inputs.
class Pipeline {
public:
    Pipeline(Config config, PipelineOptions options);

    /// Run every stage in dependency order and write the manifest.
    RunManifest run_all();

    /// Run stages up to and including `last`, writing a (partial) manifest.
    RunManifest run_until(Stage last);

    // Stage results (valid after the corresponding stage ran).
    const PotentialSolution& potential() const;
    const CombinedSpectrum& spectrum() const;
    const CrossSectionCurve& xsection_curve() const;
    double enhancement() const;
    const BroadeningReport& broadening_report() const;
    const SccMetrics& metrics() const;
    double conduction_slope_GHz_per_mV() const;

    /// NV position in grid coordinates (lateral center, nv_depth below the
    /// surface).
    Vec3 nv_position() const;

    const Config& config() const { return cfg_; }

private:
    struct SpectrumState {
        CombinedSpectrum spectrum;
        std::vector<double> nv_amplitudes;  // per merged level
        GaussianMoments ground_moments;
        double E1_GHz = 0.0;
    };

    void run_potential();
    void run_spectrum();
    void run_xsection();
    void run_broadening();
    void run_metrics();

    std::string stage_key(const std::string& stage_name, const std::string& inputs_json,
                          const std::string& upstream_keys) const;
    bool try_restore(const std::string& stage_name, const std::string& key,
                     const std::vector<std::string>& files);
    void publish(const std::string& stage_name, const std::string& key,
                 const std::vector<std::string>& files, double wall_ms, bool from_cache);

    /// Full re-solve of potential + valleys at an arbitrary electrode
    /// voltage; returns the first merged level in GHz. Used by the
    /// conduction-slope evaluation.
    double first_level_at_voltage(double voltage_mV);

    Config cfg_;
    PipelineOptions opts_;
    RunManifest manifest_;
    std::map<std::string, std::string> keys_;  // stage name -> cache key

    std::optional<PotentialSolution> potential_;
    std::optional<ValleySet> valleys_;  // kept for warm starts; may be empty after cache restore
    std::optional<SpectrumState> spectrum_state_;
    std::optional<CrossSectionCurve> curve_;
    double enhancement_f_ = 0.0;
    double first_peak_GHz_ = 0.0;
    std::optional<BroadeningReport> report_;
    double slope_GHz_per_mV_ = 0.0;
    std::optional<SccMetrics> metrics_;
};

/// Convenience wrapper: load config, run everything, return the manifest.
RunManifest run_pipeline(const std::string& config_path, const PipelineOptions& options);

/// Emit plot-ready data for one figure from a completed run directory.
/// Returns the list of files written. Missing upstream artifacts raise
/// DependencyError naming the stage.
std::vector<std::string> export_figure_data(const std::string& out_dir,
                                            const std::string& figure);

} // namespace nvscc

#endif
