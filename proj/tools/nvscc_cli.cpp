// Command-line front end for the electrode-confinement simulation chain.
//
// Subcommands run the pipeline up to the named stage (reusing the stage
// cache when one is given); `export` emits plot-ready CSV tables from a
// completed run directory.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nvscc/errors.hpp"
#include "nvscc/pipeline.hpp"

namespace {

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("NV_SCC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

void print_summary(const nvscc::Pipeline& p, nvscc::Stage last) {
    using nvscc::Stage;
    const auto& pot = p.potential();
    std::cout << "potential: residual " << pot.residual << " after " << pot.iterations
              << " cycles\n";
    if (last == Stage::Potential) return;
    const auto& spec = p.spectrum();
    std::cout << "spectrum: " << spec.count << " levels, E1 = "
              << spec.levels.front().energy_GHz << " GHz";
    if (spec.count > 1)
        std::cout << ", first gap = "
                  << nvscc::level_splitting(spec, 0, 1) << " GHz";
    std::cout << "\n";
    if (last == Stage::Xsection || last == Stage::Metrics)
        std::cout << "xsection: enhancement f = " << p.enhancement() << "\n";
    if (last == Stage::Broadening || last == Stage::Metrics) {
        const auto& rep = p.broadening_report();
        std::cout << "broadening: electrode " << rep.gamma_electrode_GHz << " GHz, e-p "
                  << rep.gamma_ep_GHz << " GHz, surface " << rep.gamma_surface_GHz
                  << " GHz, total " << rep.total_phi_GHz << " GHz\n";
    }
    if (last == Stage::Metrics) {
        const auto& m = p.metrics();
        std::cout << "metrics: contrast " << m.contrast_C << ", fidelity " << m.fidelity_F
                  << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NV spin-to-charge electrode confinement pipeline"};
    app.require_subcommand(1);

    std::string config_path = "configs/default.json";
    std::string out_dir = "out";
    std::string cache_dir;
    int threads = 0;
    app.add_option("--config", config_path, "configuration file (JSON)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0: NV_SCC_THREADS or 1)");
    app.add_option("--stage-cache", cache_dir, "stage cache directory");

    auto* cmd_potential = app.add_subcommand("potential", "solve the electrode potential");
    auto* cmd_spectrum = app.add_subcommand("spectrum", "solve the 18-level valley spectrum");
    auto* cmd_xsection = app.add_subcommand("xsection", "bulk and confined cross-sections");
    auto* cmd_broadening = app.add_subcommand("broadening", "the three linewidth channels");
    auto* cmd_metrics = app.add_subcommand("metrics", "contrast and readout fidelity");
    auto* cmd_all = app.add_subcommand("all", "run the full chain");
    auto* cmd_export = app.add_subcommand("export", "emit figure data from a finished run");
    std::string figure = "fig2";
    cmd_export->add_option("figure", figure, "fig2 | fig4 | fig5 | profiles");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_export->parsed()) {
            for (const std::string& f : nvscc::export_figure_data(out_dir, figure))
                std::cout << f << "\n";
            return 0;
        }
        nvscc::PipelineOptions opts;
        opts.out_dir = out_dir;
        opts.cache_dir = cache_dir;
        opts.threads = resolve_threads(threads);

        nvscc::Stage last = nvscc::Stage::Metrics;
        if (cmd_potential->parsed()) last = nvscc::Stage::Potential;
        if (cmd_spectrum->parsed()) last = nvscc::Stage::Spectrum;
        if (cmd_xsection->parsed()) last = nvscc::Stage::Xsection;
        if (cmd_broadening->parsed()) last = nvscc::Stage::Broadening;
        if (cmd_all->parsed() || cmd_metrics->parsed()) last = nvscc::Stage::Metrics;

        nvscc::Config cfg = nvscc::Config::load(config_path);
        for (const std::string& note : cfg.notes) std::cerr << "note: " << note << "\n";
        nvscc::Pipeline pipeline(std::move(cfg), opts);
        pipeline.run_until(last);
        print_summary(pipeline, last);
        std::cout << "manifest: " << out_dir << "/manifest.json\n";
        return 0;
    } catch (const nvscc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nvscc::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << " (residual " << e.final_residual
                  << ")\n";
        return 3;
    } catch (const nvscc::DependencyError& e) {
        std::cerr << "dependency error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
