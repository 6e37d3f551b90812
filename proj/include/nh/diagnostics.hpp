#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nh/assembly.hpp"

namespace nh {

/// Step-integrated terms of the discrete energy identity, plus the quantities
/// tracked by the a-priori bounds. Dissipation and power entries carry the dt
/// factor; energies are instantaneous values at the end of the step.
struct EnergyLedger {
  double time = 0.0;
  double dt = 0.0;

  double elastic_energy = 0.0;       // 0.5 int C^-1 T : T
  double elastic_increment = 0.0;    // int C^-1 (T - T_old) : T
  double viscous_dissipation = 0.0;  // dt int C eps(u_t) : eps(u_t)
  double plastic_dissipation = 0.0;  // dt int flow(T) : dev T
  double regularization_dissipation = 0.0; // dt (1/k) int |dev T|^{2r}
  double plastic_source_thermal = 0.0;     // dt int {|devT|-beta}_+^r |devT| (scalar route)

  double thermal_content = 0.0;       // int theta
  double thermal_primitive = 0.0;     // int phi_M(theta)
  double thermal_primitive_increment = 0.0; // int (theta - theta_old) T_M(theta)
  double thermal_gradient = 0.0;      // dt int |grad T_M(theta)|^2
  double heat_diffusion_pair = 0.0;   // dt int grad theta . grad T_M(theta)
  double heat_source_weighted = 0.0;  // dt int (T_k(diss) + Q) T_M(theta)

  double external_power = 0.0;        // dt [int F.u_t + reaction work of g_D]
  double boundary_heat = 0.0;         // dt int_bdry g_theta
  double boundary_heat_weighted = 0.0;// dt int_bdry g_theta T_M(theta)
  double coupling_exchange = 0.0;     // dt int f(T_k(theta*)) div u_t
  double coupling_heat = 0.0;         // dt int f(T_k(theta)) div u_t T_M(theta)
  double lifting_power = 0.0;         // dt int eps(lift_u_t) : T (homogenized runs)
  double stress_power = 0.0;          // dt int eps(u_t) : T

  // Raw material for the a-priori bound report.
  double strain_rate_sq = 0.0;        // dt int |eps(u_t)|^2
  double f_sq = 0.0;                  // dt int f(T_k(theta))^2
  double flow_excess_r1 = 0.0;        // dt int {|devT|-beta}_+^{r+1}

  // Residuals of the three tested identities and their combined size.
  double residual_mech = 0.0;
  double residual_flow = 0.0;
  double residual_heat = 0.0;
  double balance_residual = 0.0;
};

/// Evaluates every ledger term by quadrature from two consecutive converged
/// states and checks the three discrete identities tested with
/// (u_t, T, T_M(theta)). `momentum_residual_full` is the assembled momentum
/// residual at convergence (constrained rows give the reaction work).
EnergyLedger energy_audit(const StepInputs& in, const FieldsState& next,
                          const Eigen::VectorXd& momentum_residual_full,
                          double trunc_M);

struct Trajectory; // defined in solver.hpp

struct BoundReport {
  double sup_stress_l2 = 0.0;       // sup_t ||T(t)||_{L^2}
  double sup_reg_l2r = 0.0;         // sup_t (1/k) ||dev T(t)||^{2r}_{L^{2r}}
  double strain_rate_sq_total = 0.0;// int_0^T ||eps(u_t)||^2 dt
  double sup_theta_l1 = 0.0;        // sup_t int |theta|
  double theta_lq_w1q = 0.0;        // ||theta||_{L^q(0,T;W^{1,q})}
  double q = 1.2;
  double f_l2l2 = 0.0;              // ||f(T_k(theta))||_{L^2(L^2)}
  double flow_norm = 0.0;           // L^{(r+1)/r} norm of the flow term
  double reg_norm = 0.0;            // L^{2r/(2r-1)} norm of the scaled regularization
  double sup_combined = 0.0;         // sup_t of the combined energy quantity
};

BoundReport apriori_bounds(const FESpace& space, const MaterialModel& model,
                           const Trajectory& trajectory, double q);

struct MmsErrors {
  double u_l2 = 0.0;
  double theta_l2 = 0.0;
  double stress_l2 = 0.0;
  double time = 0.0;
};

/// L^2-in-space errors against manufactured fields at the final snapshot.
MmsErrors mms_error(const FESpace& space, const Trajectory& trajectory,
                    const std::function<Vec3(const Vec3&, double)>& exact_u,
                    const std::function<double(const Vec3&, double)>& exact_theta,
                    const std::function<SymTensor3(const Vec3&, double)>& exact_stress);

inline double observed_rate(double err_coarse, double err_fine, double ratio = 2.0) {
  return std::log(err_coarse / err_fine) / std::log(ratio);
}

} // namespace nh
