#include "nh/lifting.hpp"

#include <Eigen/SparseCholesky>

namespace nh {

namespace {

// Elasticity residual over all displacement dofs: int C eps(w):eps(v) - int F.v.
Eigen::VectorXd elastic_residual(const FESpace& space, const ElasticModuli& moduli,
                                 const Eigen::VectorXd& w,
                                 const std::function<Vec3(const Vec3&, double)>& force,
                                 double t) {
  const Mat6 chooke = hooke_mandel(moduli);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_displacement_dofs());
  for (int c = 0; c < space.n_cells(); ++c) {
    const auto& conn = space.mesh().cells[c];
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      const auto b = strain_matrix(d);
      const Vec6 sigma = chooke * space.strain_at(c, q, w);
      const Eigen::Matrix<double, 24, 1> r_e = d.weight * (b.transpose() * sigma);
      const Vec3 f = force(d.x, t);
      for (int a = 0; a < 8; ++a)
        for (int p = 0; p < 3; ++p)
          r[3 * conn[a] + p] += r_e[3 * a + p] - d.weight * d.shape[a] * f[p];
    }
  }
  return r;
}

Eigen::SparseMatrix<double> elastic_stiffness_free(const FESpace& space,
                                                   const DirichletMap& map,
                                                   const ElasticModuli& moduli) {
  const Mat6 chooke = hooke_mandel(moduli);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(space.n_cells()) * 24 * 24);
  for (int c = 0; c < space.n_cells(); ++c) {
    const auto& conn = space.mesh().cells[c];
    Eigen::Matrix<double, 24, 24> k_e = Eigen::Matrix<double, 24, 24>::Zero();
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      const auto b = strain_matrix(d);
      k_e += d.weight * (b.transpose() * chooke * b);
    }
    for (int a = 0; a < 24; ++a) {
      const int gi = 3 * conn[a / 3] + a % 3;
      if (map.free_index[gi] < 0) continue;
      for (int b2 = 0; b2 < 24; ++b2) {
        const int gj = 3 * conn[b2 / 3] + b2 % 3;
        if (map.free_index[gj] < 0) continue;
        triplets.emplace_back(map.free_index[gi], map.free_index[gj], k_e(a, b2));
      }
    }
  }
  Eigen::SparseMatrix<double> k(map.n_free(), map.n_free());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

} // namespace

DisplacementLifting solve_lifting_displacement(const FESpace& space,
                                               const DirichletMap& dirichlet,
                                               const ElasticModuli& moduli,
                                               const GivenData& data,
                                               const std::vector<double>& times,
                                               const LinearSolverConfig& cfg) {
  auto g_rate = data.dirichlet_rate;
  if (!g_rate) {
    // Central difference of the boundary data in time.
    g_rate = [&data](const Vec3& x, double t) {
      const double h = 1e-6 * std::max(1.0, std::abs(t));
      return ((data.dirichlet(x, t + h) - data.dirichlet(x, t - h)) / (2.0 * h)).eval();
    };
  }

  const Eigen::SparseMatrix<double> k =
      elastic_stiffness_free(space, dirichlet, moduli);

  DisplacementLifting out;
  out.times = times;
  out.velocity.reserve(times.size());
  out.displacement.reserve(times.size());

  for (size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    Eigen::VectorXd w = Eigen::VectorXd::Zero(space.n_displacement_dofs());
    apply_dirichlet(space, dirichlet, g_rate, t, w);
    const Eigen::VectorXd r = elastic_residual(space, moduli, w, data.body_force, t);
    Eigen::VectorXd r_free(dirichlet.n_free());
    for (int j = 0; j < dirichlet.n_free(); ++j)
      r_free[j] = r[dirichlet.free_dofs[j]];
    const Eigen::VectorXd delta = linear_solve(k, Eigen::VectorXd(-r_free), cfg);
    for (int j = 0; j < dirichlet.n_free(); ++j)
      w[dirichlet.free_dofs[j]] += delta[j];
    out.velocity.push_back(w);

    if (i == 0) {
      out.displacement.emplace_back(
          Eigen::VectorXd::Zero(space.n_displacement_dofs()));
    } else {
      // Trapezoidal accumulation of the velocity from zero.
      const double h = times[i] - times[i - 1];
      out.displacement.push_back(out.displacement.back() +
                                 0.5 * h * (out.velocity[i - 1] + out.velocity[i]));
    }
  }
  return out;
}

TemperatureLifting solve_lifting_temperature(const FESpace& space,
                                             const GivenData& data, double dt,
                                             int steps,
                                             const LinearSolverConfig& cfg) {
  const int n = space.n_nodes();
  std::vector<Eigen::Triplet<double>> tm, ta;
  for (int c = 0; c < space.n_cells(); ++c) {
    const auto& conn = space.mesh().cells[c];
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          const double mass = d.weight * d.shape[a] * d.shape[b];
          double stiff = 0.0;
          for (int p = 0; p < 3; ++p) stiff += d.grad[a][p] * d.grad[b][p];
          tm.emplace_back(conn[a], conn[b], mass);
          ta.emplace_back(conn[a], conn[b], mass / dt + d.weight * stiff);
        }
    }
  }
  Eigen::SparseMatrix<double> mass(n, n), op(n, n);
  mass.setFromTriplets(tm.begin(), tm.end());
  op.setFromTriplets(ta.begin(), ta.end());

  TemperatureLifting out;
  out.times.push_back(0.0);
  out.field.emplace_back(Eigen::VectorXd::Zero(n));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < steps; ++i) {
    const double t_next = (i + 1) * dt;
    Eigen::VectorXd rhs = mass * theta / dt;
    for (const auto& f : space.face_qps()) {
      const double g = data.neumann_heat(f.x, t_next, f.tag);
      for (int a = 0; a < 4; ++a) rhs[f.nodes[a]] += f.weight * f.shape[a] * g;
    }
    theta = linear_solve(op, rhs, cfg);
    out.times.push_back(t_next);
    out.field.push_back(theta);
  }
  return out;
}

GivenData make_homogenized_data(const GivenData& data,
                                const DisplacementLifting& du,
                                const TemperatureLifting& dtheta) {
  GivenData h = data;
  h.homogenized = true;
  h.lifting_u_t.assign(du.velocity.begin() + 1, du.velocity.end());
  h.lifting_theta.assign(dtheta.field.begin() + 1, dtheta.field.end());
  return h;
}

} // namespace nh
