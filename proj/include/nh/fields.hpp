#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nh/fe.hpp"
#include "nh/material.hpp"
#include "nh/tensor.hpp"

namespace nh {

/// Discrete unknowns at one time level: nodal displacement and temperature,
/// one stress tensor per quadrature point.
struct FieldsState {
  Eigen::VectorXd u;
  Eigen::VectorXd theta;
  std::vector<SymTensor3> stress;
  double time = 0.0;
};

/// Problem data. The optional lifting blocks drive the homogenized run mode,
/// where the boundary data are absorbed into precomputed auxiliary fields and
/// the unknowns satisfy homogeneous conditions.
struct GivenData {
  std::function<Vec3(const Vec3&, double)> body_force =
      [](const Vec3&, double) { return Vec3::Zero(); };
  std::function<Vec3(const Vec3&, double)> dirichlet =
      [](const Vec3&, double) { return Vec3::Zero(); };
  /// Optional analytic time derivative of the Dirichlet data; the lifting
  /// solver falls back to central differences when absent.
  std::function<Vec3(const Vec3&, double)> dirichlet_rate;
  std::function<double(const Vec3&, double, int)> neumann_heat =
      [](const Vec3&, double, int) { return 0.0; };
  std::function<Vec3(const Vec3&)> u0 = [](const Vec3&) { return Vec3::Zero(); };
  std::function<SymTensor3(const Vec3&)> T0 =
      [](const Vec3&) { return SymTensor3::zero(); };
  std::function<double(const Vec3&)> theta0 = [](const Vec3&) { return 0.0; };
  /// Extra volumetric heat source (verification forcing); zero in physical runs.
  std::function<double(const Vec3&, double)> heat_source =
      [](const Vec3&, double) { return 0.0; };

  bool homogenized = false;
  /// Per-step nodal fields for the homogenized mode, index i holding values at
  /// time (i+1)*dt: auxiliary velocity and auxiliary temperature.
  std::vector<Eigen::VectorXd> lifting_u_t;
  std::vector<Eigen::VectorXd> lifting_theta;
};

/// Interpolates initial data; the initial temperature is clamped at the
/// truncation level of the model.
FieldsState initial_state(const FESpace& space, const MaterialModel& model,
                          const GivenData& data);

} // namespace nh
