#include "nh/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "nh/solver.hpp"

namespace nh {

EnergyLedger energy_audit(const StepInputs& in, const FieldsState& next,
                          const Eigen::VectorXd& momentum_residual_full,
                          double trunc_M) {
  const FESpace& space = in.space;
  const MaterialModel& model = in.model;
  const Eigen::VectorXd* lift_u = in.lift_u_t();
  const Eigen::VectorXd* lift_th = in.lift_theta();
  const double dt = in.dt;

  EnergyLedger led;
  led.time = next.time;
  led.dt = dt;

  // Nodal test vector of the thermal identity: interpolant of T_M(theta).
  Eigen::VectorXd v_nodal(space.n_nodes());
  for (int i = 0; i < space.n_nodes(); ++i)
    v_nodal[i] = truncate(trunc_M, next.theta[i]);

  const Eigen::VectorXd u_dot = (next.u - in.now.u) / dt;

  for (int c = 0; c < space.n_cells(); ++c) {
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      const int qidx = c * FESpace::kQpPerCell + q;
      const double w = d.weight;

      const SymTensor3& t_new = next.stress[qidx];
      const SymTensor3& t_old = in.now.stress[qidx];
      const SymTensor3 dev_new = t_new.deviator();

      const Vec6 rate =
          (space.strain_at(c, q, next.u) - space.strain_at(c, q, in.now.u)) / dt;
      const SymTensor3 rate_t = SymTensor3::from_mandel(rate);
      const double div_ut = rate[0] + rate[1] + rate[2];

      double th_star = space.scalar_at(c, q, in.theta_star);
      double th_new = space.scalar_at(c, q, next.theta);
      double div_total = div_ut;
      double lift_rate_power = 0.0;
      if (lift_u) {
        const Vec6 lr = space.strain_at(c, q, *lift_u);
        div_total += lr[0] + lr[1] + lr[2];
        lift_rate_power = SymTensor3::from_mandel(lr).ddot(t_new);
      }
      if (lift_th) {
        const double lt = space.scalar_at(c, q, *lift_th);
        th_star += lt;
        th_new += lt;
      }

      led.elastic_energy += 0.5 * w * energy_inner(model.moduli, t_new, t_new, true);
      led.elastic_increment += w * energy_inner(model.moduli, t_new - t_old, t_new, true);
      led.viscous_dissipation +=
          dt * w * energy_inner(model.moduli, rate_t, rate_t, false);
      led.stress_power += dt * w * rate_t.ddot(t_new);
      led.lifting_power += dt * w * lift_rate_power;

      led.plastic_dissipation +=
          dt * w * flow_rate(model, t_new, th_star).ddot(dev_new);
      led.regularization_dissipation +=
          dt * w * regularization_rate(model, t_new).ddot(dev_new);
      led.plastic_source_thermal +=
          dt * w * dissipation_density(model, t_new, th_star, false);
      const double excess = yield_excess(model, t_new, th_star);
      led.flow_excess_r1 += dt * w * std::pow(excess, model.r_exp + 1.0);

      const double f_star = f_eval(model, truncate(model.trunc_k, th_star));
      const double f_new = f_eval(model, truncate(model.trunc_k, th_new));
      led.coupling_exchange += dt * w * f_star * div_ut;
      led.f_sq += dt * w * f_new * f_new;
      led.strain_rate_sq += dt * w * rate.squaredNorm();

      if (!in.data.homogenized) {
        const Vec3 f_body = in.data.body_force(d.x, in.t_next);
        led.external_power += dt * w * f_body.dot(space.vector_at(c, q, u_dot));
      }

      // Thermal identity tested with v = interpolated T_M(theta).
      const double v_qp = space.scalar_at(c, q, v_nodal);
      const Vec3 grad_v = space.scalar_grad_at(c, q, v_nodal);
      const Vec3 grad_th = space.scalar_grad_at(c, q, next.theta);
      const double th_qp = space.scalar_at(c, q, next.theta);
      const double th_old_qp = space.scalar_at(c, q, in.now.theta);

      led.thermal_content += w * th_qp;
      led.thermal_primitive += w * truncation_primitive(trunc_M, th_qp);
      led.thermal_primitive_increment += w * (th_qp - th_old_qp) * v_qp;
      led.thermal_gradient += dt * w * grad_v.squaredNorm();
      led.heat_diffusion_pair += dt * w * grad_th.dot(grad_v);
      led.coupling_heat += dt * w * f_new * div_total * v_qp;

      const double src = truncate(model.trunc_k,
                                  dissipation_density(model, t_new, th_star, false)) +
                         in.data.heat_source(d.x, in.t_next);
      led.heat_source_weighted += dt * w * src * v_qp;
    }
  }

  // Reaction work of the prescribed boundary motion: constrained rows of the
  // converged momentum residual paired with the boundary velocity.
  double react = 0.0;
  for (int i = 0; i < momentum_residual_full.size(); ++i)
    if (in.dirichlet.constrained[i]) react += momentum_residual_full[i] * u_dot[i];
  led.external_power += dt * react;

  if (!in.data.homogenized) {
    for (const auto& f : space.face_qps()) {
      const double g = in.data.neumann_heat(f.x, in.t_next, f.tag);
      double v_face = 0.0;
      for (int a = 0; a < 4; ++a) v_face += f.shape[a] * v_nodal[f.nodes[a]];
      led.boundary_heat += dt * f.weight * g;
      led.boundary_heat_weighted += dt * f.weight * g * v_face;
    }
  }

  led.residual_mech = led.stress_power - led.coupling_exchange +
                      led.viscous_dissipation - led.external_power;
  led.residual_flow = led.elastic_increment + led.plastic_dissipation +
                      led.regularization_dissipation - led.stress_power -
                      led.lifting_power;
  led.residual_heat = led.thermal_primitive_increment + led.heat_diffusion_pair +
                      led.coupling_heat - led.heat_source_weighted -
                      led.boundary_heat_weighted;

  const double scale =
      1.0 + std::max({std::abs(led.elastic_increment), std::abs(led.stress_power),
                      led.viscous_dissipation, led.plastic_dissipation,
                      led.regularization_dissipation, std::abs(led.external_power),
                      std::abs(led.coupling_exchange), std::abs(led.coupling_heat),
                      std::abs(led.thermal_primitive_increment),
                      std::abs(led.heat_diffusion_pair),
                      std::abs(led.heat_source_weighted),
                      std::abs(led.boundary_heat_weighted),
                      std::abs(led.lifting_power)});
  led.balance_residual = (std::abs(led.residual_mech) + std::abs(led.residual_flow) +
                          std::abs(led.residual_heat)) /
                         scale;
  return led;
}

BoundReport apriori_bounds(const FESpace& space, const MaterialModel& model,
                           const Trajectory& trajectory, double q) {
  BoundReport rep;
  rep.q = q;
  const double r = model.r_exp;

  // Time-integrated entries accumulate the per-step ledger columns.
  double reg_total = 0.0;
  std::vector<double> cum_strain(trajectory.ledgers.size() + 1, 0.0);
  for (size_t i = 0; i < trajectory.ledgers.size(); ++i) {
    const EnergyLedger& led = trajectory.ledgers[i];
    rep.strain_rate_sq_total += led.strain_rate_sq;
    rep.f_l2l2 += led.f_sq;
    rep.flow_norm += led.flow_excess_r1;
    reg_total += led.regularization_dissipation;
    cum_strain[i + 1] = cum_strain[i] + led.strain_rate_sq;
  }
  rep.f_l2l2 = std::sqrt(rep.f_l2l2);
  rep.flow_norm = std::pow(rep.flow_norm, r / (r + 1.0));
  if (model.truncated() && reg_total > 0.0)
    rep.reg_norm = (1.0 / model.trunc_k) *
                   std::pow(model.trunc_k * reg_total, (2.0 * r - 1.0) / (2.0 * r));

  double lq_time = 0.0;
  double prev_time = 0.0;
  for (const auto& [step, state] : trajectory.snapshots) {
    double stress_sq = 0.0, reg = 0.0, theta_l1 = 0.0, w1q = 0.0;
    for (int c = 0; c < space.n_cells(); ++c)
      for (int qp = 0; qp < FESpace::kQpPerCell; ++qp) {
        const auto& d = space.qp(c, qp);
        const int qidx = c * FESpace::kQpPerCell + qp;
        const SymTensor3& t = state.stress[qidx];
        stress_sq += d.weight * t.ddot(t);
        if (model.truncated())
          reg += d.weight * std::pow(t.deviator().norm(), 2.0 * r) / model.trunc_k;
        const double th = space.scalar_at(c, qp, state.theta);
        theta_l1 += d.weight * std::abs(th);
        w1q += d.weight * (std::pow(std::abs(th), q) +
                           std::pow(space.scalar_grad_at(c, qp, state.theta).norm(), q));
      }
    rep.sup_stress_l2 = std::max(rep.sup_stress_l2, std::sqrt(stress_sq));
    rep.sup_reg_l2r = std::max(rep.sup_reg_l2r, reg);
    rep.sup_theta_l1 = std::max(rep.sup_theta_l1, theta_l1);
    rep.sup_combined = std::max(
        rep.sup_combined, stress_sq + reg + cum_strain[std::min<size_t>(
                             step, cum_strain.size() - 1)] + theta_l1);
    if (step > 0) lq_time += (state.time - prev_time) * w1q;
    prev_time = state.time;
  }
  rep.theta_lq_w1q = std::pow(lq_time, 1.0 / q);
  return rep;
}

MmsErrors mms_error(const FESpace& space, const Trajectory& trajectory,
                    const std::function<Vec3(const Vec3&, double)>& exact_u,
                    const std::function<double(const Vec3&, double)>& exact_theta,
                    const std::function<SymTensor3(const Vec3&, double)>& exact_stress) {
  const FieldsState& state = trajectory.snapshots.back().second;
  const double t = state.time;
  MmsErrors err;
  err.time = t;
  double eu = 0.0, eth = 0.0, es = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      const int qidx = c * FESpace::kQpPerCell + q;
      eu += d.weight * (space.vector_at(c, q, state.u) - exact_u(d.x, t)).squaredNorm();
      const double dth = space.scalar_at(c, q, state.theta) - exact_theta(d.x, t);
      eth += d.weight * dth * dth;
      if (exact_stress) {
        const SymTensor3 ds = state.stress[qidx] - exact_stress(d.x, t);
        es += d.weight * ds.ddot(ds);
      }
    }
  err.u_l2 = std::sqrt(eu);
  err.theta_l2 = std::sqrt(eth);
  err.stress_l2 = std::sqrt(es);
  return err;
}

} // namespace nh
