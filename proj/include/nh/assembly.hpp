#pragma once

#include <Eigen/Sparse>

#include "nh/fields.hpp"

namespace nh {

/// Shared context of one backward-Euler step from `now.time` to `t_next`.
/// `theta_star` is the nodal temperature frozen inside f and beta for the
/// mechanical solve (previous time level in the staggered scheme, previous
/// outer iterate in the fixed-point scheme).
struct StepInputs {
  const FESpace& space;
  const DirichletMap& dirichlet;
  const MaterialModel& model;
  const GivenData& data;
  const FieldsState& now;
  const Eigen::VectorXd& theta_star;
  double t_next = 0.0;
  double dt = 0.0;
  int step_index = 0;

  const Eigen::VectorXd* lift_u_t() const {
    if (!data.homogenized) return nullptr;
    return &data.lifting_u_t.at(step_index);
  }
  const Eigen::VectorXd* lift_theta() const {
    if (!data.homogenized) return nullptr;
    return &data.lifting_theta.at(step_index);
  }
};

struct MomentumAssembly {
  Eigen::VectorXd residual_full; // all displacement dofs, constrained rows kept
  Eigen::VectorXd residual_free;
  Eigen::SparseMatrix<double> tangent; // free x free, consistent
  std::vector<SymTensor3> stress;      // condensed flow-rule solution per qp
};

/// Residual of the discrete momentum balance
///   int (T - f(T_k(theta)) Id) : eps(w) + int C eps(u_t) : eps(w) - int F.w
/// with the stress eliminated per quadrature point through the implicit
/// flow-rule update driven by the current displacement guess.
MomentumAssembly assemble_momentum(const StepInputs& in,
                                   const Eigen::VectorXd& u_guess,
                                   bool want_tangent);

struct HeatAssembly {
  Eigen::VectorXd residual;
  Eigen::SparseMatrix<double> tangent;
};

/// Residual of the backward-Euler heat step with the advective coupling
/// f(T_k(theta)) div(u_t), a prescribed quadrature-point source, and the
/// Neumann boundary integral of g_theta.
HeatAssembly assemble_heat(const StepInputs& in, const Eigen::VectorXd& theta_guess,
                           const Eigen::VectorXd& u_next,
                           const std::vector<double>& source_qp, bool want_tangent);

/// Truncated plastic dissipation T_k({|dev T| - beta}_+^r |dev T|) per
/// quadrature point; the heat-equation source.
std::vector<double> dissipation_source_qp(const StepInputs& in,
                                          const std::vector<SymTensor3>& stress_next);

} // namespace nh
