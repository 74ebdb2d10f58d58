#ifndef NVSCC_ELECTROSTATICS_HPP
#define NVSCC_ELECTROSTATICS_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "nvscc/config.hpp"
#include "nvscc/grid.hpp"

namespace nvscc {

/// Result of a Laplace solve. `residual` is the relative algebraic residual
/// reached, `iterations` the number of multigrid cycles.
struct PotentialSolution {
    ScalarField3D potential;  // volts
    double residual = 0.0;
    std::int64_t iterations = 0;

    void check_invariants(double electrode_voltage_mV, double tol) const;
};

/// Solve div(eps grad V) = 0 in the diamond half-space below the electrode.
///
/// The grid's z = 0 face is the diamond surface. Boundary conditions:
///   - Dirichlet V = electrode_voltage on the electrode disc footprint,
///     centered laterally on the top face;
///   - Dirichlet V = 0 on the lateral and bottom far boundaries;
///   - homogeneous Neumann on the remaining top surface.
///
/// The dielectric is uniform, so the equation reduces to Laplace's.
/// Throws SolverFailure (carrying the final residual) on non-convergence.
PotentialSolution solve_potential(const DeviceGeometry& geometry, const Grid3D& grid,
                                  double tol = 1e-8,
                                  std::int64_t max_cycles = 20000,
                                  int threads = 1);

/// Laplace solve with Dirichlet data on every face, for convergence studies
/// against harmonic reference solutions.
PotentialSolution solve_laplace_dirichlet(const Grid3D& grid,
                                          const std::function<double(const Vec3&)>& boundary,
                                          double tol = 1e-8,
                                          std::int64_t max_cycles = 20000,
                                          int threads = 1);

/// Trilinear samples of the potential along z through (x, y), from the top
/// surface to the bottom boundary, one sample per grid z-level.
/// Returns (depth_nm, potential_mV) pairs.
std::vector<std::pair<double, double>> axial_profile(const PotentialSolution& solution,
                                                     double x_nm, double y_nm);

} // namespace nvscc

#endif
