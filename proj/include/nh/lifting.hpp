#pragma once

#include "nh/fields.hpp"
#include "nh/solver.hpp"

namespace nh {

/// Auxiliary displacement field: at each time solves the elastostatic problem
///   -div C eps(w) = F,  w = g_D,t on the boundary,
/// for the velocity w and accumulates the displacement by the trapezoidal
/// rule from zero. Arrays are aligned with the time grid 0, dt, ..., t_end.
struct DisplacementLifting {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> velocity;
  std::vector<Eigen::VectorXd> displacement;
};

DisplacementLifting solve_lifting_displacement(const FESpace& space,
                                               const DirichletMap& dirichlet,
                                               const ElasticModuli& moduli,
                                               const GivenData& data,
                                               const std::vector<double>& times,
                                               const LinearSolverConfig& cfg);

/// Auxiliary temperature field: backward-Euler heat solves with zero source,
/// Neumann data g_theta and zero initial condition. field[i] holds the value
/// at times[i], with times[0] = 0.
struct TemperatureLifting {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> field;
};

TemperatureLifting solve_lifting_temperature(const FESpace& space,
                                             const GivenData& data, double dt,
                                             int steps,
                                             const LinearSolverConfig& cfg);

/// Attaches the per-step lifting fields to a copy of `data` and switches it
/// into the homogenized mode (zero Dirichlet/Neumann data, no body force).
GivenData make_homogenized_data(const GivenData& data,
                                const DisplacementLifting& du,
                                const TemperatureLifting& dtheta);

} // namespace nh
