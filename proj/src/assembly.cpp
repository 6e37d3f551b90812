#include "nh/assembly.hpp"

#include <vector>

namespace nh {

FieldsState initial_state(const FESpace& space, const MaterialModel& model,
                          const GivenData& data) {
  FieldsState st;
  st.time = 0.0;
  st.u = space.interpolate_vector(data.u0);
  st.theta = space.interpolate_scalar([&](const Vec3& x) {
    return truncate(model.trunc_k, data.theta0(x));
  });
  st.stress.resize(space.n_qp());
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      st.stress[c * FESpace::kQpPerCell + q] = data.T0(space.qp(c, q).x);
  return st;
}

MomentumAssembly assemble_momentum(const StepInputs& in,
                                   const Eigen::VectorXd& u_guess,
                                   bool want_tangent) {
  const FESpace& space = in.space;
  const MaterialModel& model = in.model;
  const Eigen::VectorXd* lift_u = in.lift_u_t();
  const Eigen::VectorXd* lift_th = in.lift_theta();
  const Mat6 chooke = hooke_mandel(model.moduli);
  const Vec6 vol = mandel_id();

  MomentumAssembly out;
  out.residual_full.setZero(space.n_displacement_dofs());
  out.stress.resize(space.n_qp());

  std::vector<Eigen::Triplet<double>> triplets;
  if (want_tangent) triplets.reserve(static_cast<size_t>(space.n_cells()) * 24 * 24);

  for (int c = 0; c < space.n_cells(); ++c) {
    const auto& conn = space.mesh().cells[c];
    Eigen::Matrix<double, 24, 1> r_e = Eigen::Matrix<double, 24, 1>::Zero();
    Eigen::Matrix<double, 24, 24> k_e;
    if (want_tangent) k_e.setZero();

    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      const int qidx = c * FESpace::kQpPerCell + q;

      const Vec6 eps_now = space.strain_at(c, q, in.now.u);
      const Vec6 eps_guess = space.strain_at(c, q, u_guess);
      const Vec6 rate = (eps_guess - eps_now) / in.dt;
      Vec6 total_rate = rate;
      if (lift_u) total_rate += space.strain_at(c, q, *lift_u);

      double th = space.scalar_at(c, q, in.theta_star);
      if (lift_th) th += space.scalar_at(c, q, *lift_th);

      const MaterialPointState st{in.now.stress[qidx], th, in.now.time};
      const PointStepResult ps = material_point_step_full(
          model, st, SymTensor3::from_mandel(total_rate), th, in.dt);
      out.stress[qidx] = ps.stress;

      const double fv = f_eval(model, truncate(model.trunc_k, th));
      const Vec6 sigma = ps.stress.mandel() - fv * vol + chooke * rate;

      const auto b = strain_matrix(d);
      r_e += d.weight * (b.transpose() * sigma);
      if (!in.data.homogenized) {
        const Vec3 f = in.data.body_force(d.x, in.t_next);
        for (int a = 0; a < 8; ++a)
          for (int p = 0; p < 3; ++p) r_e[3 * a + p] -= d.weight * d.shape[a] * f[p];
      }
      if (want_tangent) {
        const Mat6 dmat = ps.tangent + chooke / in.dt;
        k_e += d.weight * (b.transpose() * dmat * b);
      }
    }

    for (int a = 0; a < 8; ++a)
      for (int p = 0; p < 3; ++p) {
        const int gi = 3 * conn[a] + p;
        out.residual_full[gi] += r_e[3 * a + p];
        if (!want_tangent || in.dirichlet.free_index[gi] < 0) continue;
        for (int b2 = 0; b2 < 8; ++b2)
          for (int p2 = 0; p2 < 3; ++p2) {
            const int gj = 3 * conn[b2] + p2;
            if (in.dirichlet.free_index[gj] < 0) continue;
            triplets.emplace_back(in.dirichlet.free_index[gi],
                                  in.dirichlet.free_index[gj],
                                  k_e(3 * a + p, 3 * b2 + p2));
          }
      }
  }

  out.residual_free.resize(in.dirichlet.n_free());
  for (int i = 0; i < in.dirichlet.n_free(); ++i)
    out.residual_free[i] = out.residual_full[in.dirichlet.free_dofs[i]];

  if (want_tangent) {
    out.tangent.resize(in.dirichlet.n_free(), in.dirichlet.n_free());
    out.tangent.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

HeatAssembly assemble_heat(const StepInputs& in, const Eigen::VectorXd& theta_guess,
                           const Eigen::VectorXd& u_next,
                           const std::vector<double>& source_qp, bool want_tangent) {
  const FESpace& space = in.space;
  const MaterialModel& model = in.model;
  const Eigen::VectorXd* lift_u = in.lift_u_t();
  const Eigen::VectorXd* lift_th = in.lift_theta();

  HeatAssembly out;
  out.residual.setZero(space.n_nodes());
  std::vector<Eigen::Triplet<double>> triplets;
  if (want_tangent) triplets.reserve(static_cast<size_t>(space.n_cells()) * 64);

  for (int c = 0; c < space.n_cells(); ++c) {
    const auto& conn = space.mesh().cells[c];
    Eigen::Matrix<double, 8, 1> r_e = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 8> k_e;
    if (want_tangent) k_e.setZero();

    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      const int qidx = c * FESpace::kQpPerCell + q;

      const double th = space.scalar_at(c, q, theta_guess);
      const double th_now = space.scalar_at(c, q, in.now.theta);
      const Vec3 gth = space.scalar_grad_at(c, q, theta_guess);

      const Vec6 rate =
          (space.strain_at(c, q, u_next) - space.strain_at(c, q, in.now.u)) / in.dt;
      double div_ut = rate[0] + rate[1] + rate[2];
      if (lift_u) {
        const Vec6 lr = space.strain_at(c, q, *lift_u);
        div_ut += lr[0] + lr[1] + lr[2];
      }

      double th_full = th;
      if (lift_th) th_full += space.scalar_at(c, q, *lift_th);
      const double farg = truncate(model.trunc_k, th_full);
      const double fv = f_eval(model, farg);
      // Chain rule through the clamp: derivative 1 inside the band, 0 outside.
      const double dfv =
          std::abs(th_full) <= model.trunc_k ? f_derivative(model, farg) : 0.0;

      const double src = source_qp[qidx] + in.data.heat_source(d.x, in.t_next);

      for (int a = 0; a < 8; ++a) {
        const Vec3 ga(d.grad[a][0], d.grad[a][1], d.grad[a][2]);
        r_e[a] += d.weight * ((th - th_now) / in.dt * d.shape[a] + gth.dot(ga) +
                              fv * div_ut * d.shape[a] - src * d.shape[a]);
        if (!want_tangent) continue;
        for (int b = 0; b < 8; ++b) {
          const Vec3 gb(d.grad[b][0], d.grad[b][1], d.grad[b][2]);
          k_e(a, b) += d.weight *
                       (d.shape[a] * d.shape[b] / in.dt + ga.dot(gb) +
                        dfv * div_ut * d.shape[a] * d.shape[b]);
        }
      }
    }

    for (int a = 0; a < 8; ++a) {
      out.residual[conn[a]] += r_e[a];
      if (!want_tangent) continue;
      for (int b = 0; b < 8; ++b)
        triplets.emplace_back(conn[a], conn[b], k_e(a, b));
    }
  }

  if (!in.data.homogenized) {
    for (const auto& f : space.face_qps()) {
      const double g = in.data.neumann_heat(f.x, in.t_next, f.tag);
      for (int a = 0; a < 4; ++a)
        out.residual[f.nodes[a]] -= f.weight * f.shape[a] * g;
    }
  }

  if (want_tangent) {
    out.tangent.resize(space.n_nodes(), space.n_nodes());
    out.tangent.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

std::vector<double> dissipation_source_qp(const StepInputs& in,
                                          const std::vector<SymTensor3>& stress_next) {
  const FESpace& space = in.space;
  const Eigen::VectorXd* lift_th = in.lift_theta();
  std::vector<double> src(space.n_qp());
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const int qidx = c * FESpace::kQpPerCell + q;
      double th = space.scalar_at(c, q, in.theta_star);
      if (lift_th) th += space.scalar_at(c, q, *lift_th);
      src[qidx] = truncate(in.model.trunc_k,
                           dissipation_density(in.model, stress_next[qidx], th, false));
    }
  return src;
}

} // namespace nh
