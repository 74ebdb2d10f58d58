#include <doctest.h>

#include <cmath>

#include "nvscc/constants.hpp"
#include "nvscc/electrostatics.hpp"
#include "nvscc/errors.hpp"

using namespace nvscc;

namespace {

DeviceGeometry paper_geometry() {
    DeviceGeometry g;
    g.electrode_radius = 125.0;
    g.electrode_voltage = 10.0;
    g.nv_depth = 50.0;
    return g;
}

/// Harmonic reference V* = sin(pi x/L) sin(pi y/L) sinh(sqrt(2) pi z/L):
/// an exact Laplace solution, imposed through the Dirichlet data.
double harmonic_reference(const Vec3& p, double L) {
    const double k = std::sqrt(2.0) * constants::pi / L;
    return std::sin(constants::pi * p[0] / L) * std::sin(constants::pi * p[1] / L) *
           std::sinh(k * p[2]);
}

double l2_error_against_reference(const PotentialSolution& sol, double L) {
    const Grid3D& g = sol.potential.grid;
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t k = 0; k < g.counts[2]; ++k)
        for (std::int64_t j = 0; j < g.counts[1]; ++j)
            for (std::int64_t i = 0; i < g.counts[0]; ++i) {
                const double d =
                    sol.potential.at(i, j, k) - harmonic_reference(g.position(i, j, k), L);
                sum += d * d;
                ++count;
            }
    return std::sqrt(sum / double(count));
}

} // namespace

TEST_CASE("zero electrode voltage gives the identically zero field") {
    DeviceGeometry geo = paper_geometry();
    geo.electrode_voltage = 0.0;
    const Grid3D grid = build_grid({300, 300, 150}, {15, 15, 15});
    const PotentialSolution sol = solve_potential(geo, grid, 1e-10);
    for (double v : sol.potential.values) CHECK(v == 0.0);
    // all-zero profile
    for (const auto& [depth, mv] : axial_profile(sol, 150.0, 150.0)) CHECK(mv == 0.0);
}

TEST_CASE("manufactured harmonic solution: second-order convergence") {
    const double L = 120.0;
    auto bc = [L](const Vec3& p) { return harmonic_reference(p, L); };

    const Grid3D coarse = build_grid({L, L, L}, {L / 12, L / 12, L / 12});
    const Grid3D fine = build_grid({L, L, L}, {L / 24, L / 24, L / 24});
    const double e_coarse = l2_error_against_reference(solve_laplace_dirichlet(coarse, bc, 1e-11), L);
    const double e_fine = l2_error_against_reference(solve_laplace_dirichlet(fine, bc, 1e-11), L);
    const double ratio = e_coarse / e_fine;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("maximum principle: extremes only on boundary nodes") {
    const DeviceGeometry geo = paper_geometry();
    const Grid3D grid = build_grid({600, 600, 300}, {15, 15, 15});
    const PotentialSolution sol = solve_potential(geo, grid, 1e-9);
    const auto& g = sol.potential.grid;
    double interior_max = -1e300, interior_min = 1e300;
    for (std::int64_t k = 1; k < g.counts[2] - 1; ++k)
        for (std::int64_t j = 1; j < g.counts[1] - 1; ++j)
            for (std::int64_t i = 1; i < g.counts[0] - 1; ++i) {
                interior_max = std::max(interior_max, sol.potential.at(i, j, k));
                interior_min = std::min(interior_min, sol.potential.at(i, j, k));
            }
    const double vmax = geo.electrode_voltage * 1e-3;
    CHECK(interior_max <= vmax * (1 + 1e-9));
    CHECK(interior_min >= -1e-12 * vmax);
    sol.check_invariants(geo.electrode_voltage, 1e-9);
}

TEST_CASE("linearity: doubling the voltage doubles the solution node-wise") {
    DeviceGeometry geo = paper_geometry();
    const Grid3D grid = build_grid({400, 400, 200}, {20, 20, 20});
    const PotentialSolution sol1 = solve_potential(geo, grid, 1e-11);
    geo.electrode_voltage = 20.0;
    const PotentialSolution sol2 = solve_potential(geo, grid, 1e-11);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol1.potential.values.size(); ++i)
        worst = std::max(worst,
                         std::abs(sol2.potential.values[i] - 2.0 * sol1.potential.values[i]));
    CHECK(worst <= 1e-8 * 20e-3);
}

TEST_CASE("paper geometry: on-axis value at 50 nm sits inside (0, V0), profile monotone") {
    const DeviceGeometry geo = paper_geometry();
    const Grid3D grid = build_grid({1000, 1000, 500}, {10, 10, 5});
    const PotentialSolution sol = solve_potential(geo, grid, 1e-9);
    const auto profile = axial_profile(sol, 500.0, 500.0);

    CHECK(profile.front().second == doctest::Approx(10.0));  // on the electrode
    double v50 = -1;
    for (const auto& [depth, mv] : profile)
        if (std::abs(depth - 50.0) < 1e-9) v50 = mv;
    CHECK(v50 > 0.0);
    CHECK(v50 < 10.0);

    // monotone decrease with depth beyond the on-axis maximum (the surface)
    for (std::size_t i = 1; i < profile.size(); ++i)
        CHECK(profile[i].second <= profile[i - 1].second + 1e-9);

    // agreement with a finer-grid reference at the NV depth
    const Grid3D fine = build_grid({1000, 1000, 500}, {5, 5, 2.5});
    const PotentialSolution ref = solve_potential(geo, fine, 1e-9);
    const double v50_ref = ref.potential.sample({500.0, 500.0, 50.0}) * 1e3;
    CHECK(v50 == doctest::Approx(v50_ref).epsilon(0.02));
}

TEST_CASE("voltage perturbation of 0.001 mV moves the 50 nm value by far less than 0.01 mV") {
    DeviceGeometry geo = paper_geometry();
    const Grid3D grid = build_grid({600, 600, 300}, {10, 10, 5});
    const PotentialSolution base = solve_potential(geo, grid, 1e-10);
    geo.electrode_voltage = 10.001;
    const PotentialSolution up = solve_potential(geo, grid, 1e-10);
    const double delta = std::abs(up.potential.sample({300, 300, 50}) -
                                  base.potential.sample({300, 300, 50})) * 1e3;
    CHECK(delta < 0.01);
    CHECK(delta > 0.0);
}

TEST_CASE("axial_profile rejects points outside the footprint") {
    const DeviceGeometry geo = paper_geometry();
    const Grid3D grid = build_grid({300, 300, 150}, {15, 15, 15});
    const PotentialSolution sol = solve_potential(geo, grid, 1e-9);
    CHECK_THROWS_AS(axial_profile(sol, -5.0, 150.0), std::invalid_argument);
}

TEST_CASE("well depth converges under grid refinement (< 2% on halving)") {
    const DeviceGeometry geo = paper_geometry();
    const Grid3D coarse = build_grid({800, 800, 400}, {20, 20, 10});
    const Grid3D fine = build_grid({800, 800, 400}, {10, 10, 5});
    const double v_coarse =
        solve_potential(geo, coarse, 1e-10).potential.sample({400, 400, 50});
    const double v_fine = solve_potential(geo, fine, 1e-10).potential.sample({400, 400, 50});
    CHECK(std::abs(v_fine - v_coarse) / std::abs(v_fine) < 0.02);
}
