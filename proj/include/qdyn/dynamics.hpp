#pragma once

// State evolution. The primary path applies the exact affine Bloch maps;
// ode_oracle_trajectory independently integrates the equivalent time-local
// generator ndot = A(t) n + b(t) and exists to cross-check the maps.

#include <Eigen/Dense>
#include <vector>

#include "qdyn/models.hpp"
#include "qdyn/qubit.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn {

struct Trajectory {
    TimeGrid grid;
    std::vector<Eigen::Vector3d> states;
};

Eigen::Vector3d evolve(const ModelSpec& model, const Eigen::Vector3d& n0,
                       double t);

Trajectory trajectory(const ModelSpec& model, const Eigen::Vector3d& n0,
                      const TimeGrid& grid);

struct BlochGenerator {
    Eigen::Matrix3d linear = Eigen::Matrix3d::Zero();
    Eigen::Vector3d affine = Eigen::Vector3d::Zero();
};

/// Generator of the time-local master equation in Bloch form. Dephasing:
/// diag(-2g, -2g, 0) plus an xy rotation at h_z; damping: -g/2 on the
/// transverse block, -g on z with b_z = g (relaxation toward +z); Pauli:
/// diag of pairwise rate sums. Throws SingularRateError where rates diverge.
BlochGenerator generator(const ModelSpec& model, double t);

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) integration of the
/// generator, sampled on `grid`. Local error controlled to `tol`. Refuses to
/// cross rate singularities; expect IntegrationError with the failing time
/// when the window contains one.
Trajectory ode_oracle_trajectory(const ModelSpec& model,
                                 const Eigen::Vector3d& n0,
                                 const TimeGrid& grid, double tol = 1e-9);

}  // namespace qdyn
