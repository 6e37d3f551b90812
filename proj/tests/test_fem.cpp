#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "nh/assembly.hpp"
#include "nh/errors.hpp"
#include "nh/lifting.hpp"
#include "nh/solver.hpp"

using namespace nh;

namespace {

MaterialModel elastic_model() {
  MaterialModel m;
  m.f_spec.kind = FSpec::Kind::Zero;
  m.beta_spec.d = 1e8; // never yields
  m.trunc_k = kInf;
  m.newton_tol = 1e-12;
  return m;
}

SolverConfig one_step_config(double dt = 0.5) {
  SolverConfig c;
  c.dt = dt;
  c.t_end = dt;
  c.newton_tol = 1e-12;
  return c;
}

} // namespace

TEST_CASE("box mesh counts") {
  const Mesh m1 = build_box_mesh({1, 1, 1}, {1, 1, 1});
  CHECK(m1.n_vertices() == 8);
  CHECK(m1.n_cells() == 1);
  CHECK(m1.boundary_faces.size() == 6);

  const Mesh m2 = build_box_mesh({1, 1, 1}, {2, 2, 2});
  CHECK(m2.n_vertices() == 27);
  CHECK(m2.n_cells() == 8);
  CHECK(m2.boundary_faces.size() == 24);

  CHECK_THROWS_AS(build_box_mesh({1, 1, 1}, {0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_box_mesh({0, 1, 1}, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("structured grid jacobians are positive and equal") {
  const Mesh mesh = build_box_mesh({2, 1, 1}, {4, 2, 2});
  const FESpace space(mesh);
  const double expected = (2.0 / 4) * (1.0 / 2) * (1.0 / 2) / 8.0; // cell vol / 8
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      CHECK(space.qp(c, q).weight == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("mesh file roundtrip") {
  const Mesh mesh = build_box_mesh({1.5, 0.7, 2.0}, {2, 3, 1});
  const std::string path = "roundtrip_mesh.txt";
  write_mesh(mesh, path);
  const Mesh back = read_mesh(path);
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_cells() == mesh.n_cells());
  REQUIRE(back.boundary_faces.size() == mesh.boundary_faces.size());
  for (int n = 0; n < mesh.n_vertices(); ++n)
    for (int d = 0; d < 3; ++d) CHECK(back.vertices[n][d] == mesh.vertices[n][d]);
  for (int c = 0; c < mesh.n_cells(); ++c) CHECK(back.cells[c] == mesh.cells[c]);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_mesh("does_not_exist.txt"), IoError);
}

TEST_CASE("inverted cells are rejected at space construction") {
  Mesh mesh = build_box_mesh({1, 1, 1}, {1, 1, 1});
  std::swap(mesh.cells[0][0], mesh.cells[0][1]); // tangled hexahedron
  CHECK_THROWS_AS(FESpace{mesh}, AssemblyError);
}

TEST_CASE("quadrature integrates volume and shape functions sum to one") {
  const Mesh mesh = build_box_mesh({1.3, 0.9, 1.1}, {3, 2, 2});
  const FESpace space(mesh);
  double vol = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      vol += d.weight;
      double s = 0.0;
      for (int a = 0; a < 8; ++a) s += d.shape[a];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
  CHECK(vol == doctest::Approx(1.3 * 0.9 * 1.1).epsilon(1e-13));

  double area = 0.0;
  for (const auto& f : space.face_qps()) area += f.weight;
  CHECK(area == doctest::Approx(2 * (1.3 * 0.9 + 0.9 * 1.1 + 1.3 * 1.1)).epsilon(1e-13));
}

TEST_CASE("strain of a linear displacement field is exact") {
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  // u = A x with symmetric A: strain equals A at every quadrature point.
  const SymTensor3 a{0.3, -0.1, 0.2, 0.05, -0.07, 0.11};
  const Eigen::VectorXd u = space.interpolate_vector([&](const Vec3& x) {
    return Vec3(a.xx * x[0] + a.xy * x[1] + a.xz * x[2],
                a.xy * x[0] + a.yy * x[1] + a.yz * x[2],
                a.xz * x[0] + a.yz * x[1] + a.zz * x[2]);
  });
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      CHECK((SymTensor3::from_mandel(space.strain_at(c, q, u)) - a).norm() <= 1e-13);
}

TEST_CASE("dirichlet constraint map and interpolation") {
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  CHECK(map.boundary_nodes.size() == 26); // all but the center node
  CHECK(map.n_free() == 3);

  Eigen::VectorXd u = Eigen::VectorXd::Constant(space.n_displacement_dofs(), 42.0);
  apply_dirichlet(space, map, [](const Vec3&, double) { return Vec3::Zero(); }, 0.0, u);
  for (int n : map.boundary_nodes)
    for (int p = 0; p < 3; ++p) CHECK(u[3 * n + p] == 0.0);

  // Rigid translation.
  apply_dirichlet(space, map,
                  [](const Vec3&, double) { return Vec3(1.0, 2.0, 3.0); }, 0.0, u);
  for (int n : map.boundary_nodes) CHECK(u[3 * n + 2] == 3.0);

  // Linear-in-x data is interpolated exactly at the nodes.
  apply_dirichlet(space, map,
                  [](const Vec3& x, double) { return Vec3(2 * x[0] - x[1], x[2], 0); },
                  0.0, u);
  for (int n : map.boundary_nodes) {
    const auto& v = mesh.vertices[n];
    CHECK(u[3 * n] == doctest::Approx(2 * v[0] - v[1]).epsilon(1e-15));
  }
}

TEST_CASE("constant-stress patch test") {
  const SymTensor3 a{0.02, -0.01, 0.03, 0.01, -0.005, 0.015};
  const MaterialModel model = elastic_model();
  GivenData data;
  data.dirichlet = [&](const Vec3& x, double) {
    return Vec3(a.xx * x[0] + a.xy * x[1] + a.xz * x[2],
                a.xy * x[0] + a.yy * x[1] + a.yz * x[2],
                a.xz * x[0] + a.yz * x[1] + a.zz * x[2]);
  };
  const SymTensor3 expected_stress = hooke_apply(model.moduli, a);

  for (int res : {1, 2}) {
    const Mesh mesh = build_box_mesh({1, 1, 1}, {res, res, res});
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    FieldsState st = initial_state(space, model, data);
    const StepOutput out = step(space, map, one_step_config(), model, data, st, 0);

    const Eigen::VectorXd exact = space.interpolate_vector(
        [&](const Vec3& x) { return data.dirichlet(x, 0.5); });
    CHECK((out.next.u - exact).lpNorm<Eigen::Infinity>() <= 1e-10);
    for (const SymTensor3& t : out.next.stress)
      CHECK((t - expected_stress).norm() <= 1e-10);
  }
}

TEST_CASE("rigid-motion patch test") {
  const MaterialModel model = elastic_model();
  GivenData data;
  // Translation plus a skew rotation: zero strain, zero stress.
  data.dirichlet = [](const Vec3& x, double) {
    return Vec3(0.1 + 0.02 * x[1] - 0.03 * x[2], 0.2 - 0.02 * x[0] + 0.01 * x[2],
                -0.05 + 0.03 * x[0] - 0.01 * x[1]);
  };
  for (int res : {1, 2}) {
    const Mesh mesh = build_box_mesh({1, 1, 1}, {res, res, res});
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    FieldsState st = initial_state(space, model, data);
    const StepOutput out = step(space, map, one_step_config(), model, data, st, 0);
    const Eigen::VectorXd exact = space.interpolate_vector(
        [&](const Vec3& x) { return data.dirichlet(x, 0.5); });
    CHECK((out.next.u - exact).lpNorm<Eigen::Infinity>() <= 1e-10);
    for (const SymTensor3& t : out.next.stress) CHECK(t.norm() <= 1e-10);
  }
}

TEST_CASE("heat step: uniform temperature is a steady state") {
  const MaterialModel model = elastic_model();
  GivenData data;
  data.theta0 = [](const Vec3&) { return 0.7; };
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  FieldsState st = initial_state(space, model, data);
  const StepOutput out = step(space, map, one_step_config(0.1), model, data, st, 0);
  for (int n = 0; n < space.n_nodes(); ++n)
    CHECK(out.next.theta[n] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("heat step: insulated unit source raises the mean by dt") {
  const MaterialModel model = elastic_model();
  GivenData data;
  data.heat_source = [](const Vec3&, double) { return 1.0; };
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  FieldsState st = initial_state(space, model, data);
  const double dt = 0.25;
  const StepOutput out = step(space, map, one_step_config(dt), model, data, st, 0);

  // Testing the discrete balance with the all-ones vector gives a mean
  // increase of dt * integral(source) / |Omega| exactly.
  double integral = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      integral += space.qp(c, q).weight * space.scalar_at(c, q, out.next.theta);
  CHECK(integral == doctest::Approx(dt).epsilon(1e-12));
}

TEST_CASE("heat assembly conservation against the all-ones test vector") {
  // f = 0: the converged step must satisfy
  // int theta(t+dt) - int theta(t) = dt (int source + int_bdry g_theta).
  const MaterialModel model = elastic_model();
  GivenData data;
  data.heat_source = [](const Vec3& x, double) { return x[0] * x[1]; };
  data.neumann_heat = [](const Vec3&, double, int tag) {
    return tag == kXmax ? 0.8 : 0.0;
  };
  const Mesh mesh = build_box_mesh({1, 1, 1}, {3, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  FieldsState st = initial_state(space, model, data);
  const double dt = 0.2;
  const StepOutput out = step(space, map, one_step_config(dt), model, data, st, 0);

  double int_theta = 0.0, int_src = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const auto& d = space.qp(c, q);
      int_theta += d.weight * space.scalar_at(c, q, out.next.theta);
      int_src += d.weight * data.heat_source(d.x, dt);
    }
  double bdry = 0.0;
  for (const auto& f : space.face_qps())
    bdry += f.weight * data.neumann_heat(f.x, dt, f.tag);
  CHECK(int_theta == doctest::Approx(dt * (int_src + bdry)).epsilon(1e-10));
}

TEST_CASE("condensed stress satisfies the flow-rule residual pointwise") {
  MaterialModel model;
  model.f_spec.kind = FSpec::Kind::Zero;
  model.beta_spec.d = 0.3;
  model.trunc_k = 5.0;
  model.newton_tol = 1e-12;
  GivenData data;
  data.dirichlet = [](const Vec3& x, double t) {
    return Vec3(0.8 * t * x[1], 0.0, 0.0);
  };
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  FieldsState st = initial_state(space, model, data);
  const double dt = 0.1;
  const StepOutput out = step(space, map, one_step_config(dt), model, data, st, 0);

  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const int qidx = c * FESpace::kQpPerCell + q;
      const SymTensor3& t_new = out.next.stress[qidx];
      const Vec6 rate =
          (space.strain_at(c, q, out.next.u) - space.strain_at(c, q, st.u)) / dt;
      const double th = space.scalar_at(c, q, out.theta_star);
      const SymTensor3 resid =
          hooke_inverse_apply(model.moduli, t_new - st.stress[qidx]) * (1.0 / dt) +
          flow_rate(model, t_new, th) + regularization_rate(model, t_new) -
          SymTensor3::from_mandel(rate);
      CHECK(resid.norm() <= model.newton_tol * (1.0 + rate.norm()) * 10);
    }
}

TEST_CASE("heat tangent matches finite differences of the residual") {
  MaterialModel model;
  model.f_spec.kind = FSpec::Kind::PowerLaw; // nonzero f' exercises the coupling
  model.beta_spec.d = 0.5;
  model.trunc_k = 4.0;
  GivenData data;
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  FieldsState now = initial_state(space, model, data);

  // A synthetic step with nonzero strain rate and temperature field.
  Eigen::VectorXd u_next = space.interpolate_vector(
      [](const Vec3& x) { return Vec3(0.2 * x[1], 0.1 * x[0], 0.0); });
  Eigen::VectorXd theta(space.n_nodes());
  for (int n = 0; n < space.n_nodes(); ++n) theta[n] = 0.3 * std::sin(1.0 + n);
  std::vector<double> source(space.n_qp(), 0.05);

  const StepInputs in{space, map, model, data, now, now.theta, 0.1, 0.1, 0};
  const HeatAssembly base = assemble_heat(in, theta, u_next, source, true);
  for (int j = 0; j < space.n_nodes(); j += 5) {
    const double h = 1e-7;
    Eigen::VectorXd pert = theta;
    pert[j] += h;
    const Eigen::VectorXd fd =
        (assemble_heat(in, pert, u_next, source, false).residual - base.residual) / h;
    const Eigen::VectorXd col = base.tangent.col(j);
    CHECK((fd - col).lpNorm<Eigen::Infinity>() <=
          1e-5 * (1.0 + col.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("displacement lifting: zero data gives zero fields") {
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  GivenData data;
  const auto lift = solve_lifting_displacement(space, map, ElasticModuli{1, 1}, data,
                                               {0.0, 0.1, 0.2}, LinearSolverConfig{});
  for (const auto& v : lift.velocity) CHECK(v.norm() <= 1e-12);
  for (const auto& u : lift.displacement) CHECK(u.norm() <= 1e-12);
}

TEST_CASE("displacement lifting: rigid boundary translation extends rigidly") {
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  GivenData data;
  data.dirichlet = [](const Vec3&, double t) { return Vec3(0.3 * t, -0.1 * t, 0.0); };
  const std::vector<double> times{0.0, 0.25, 0.5};
  const auto lift = solve_lifting_displacement(space, map, ElasticModuli{1, 1}, data,
                                               times, LinearSolverConfig{});
  for (size_t i = 0; i < times.size(); ++i) {
    for (int n = 0; n < space.n_nodes(); ++n) {
      CHECK(lift.velocity[i][3 * n] == doctest::Approx(0.3).epsilon(1e-10));
      CHECK(lift.velocity[i][3 * n + 1] == doctest::Approx(-0.1).epsilon(1e-10));
      CHECK(lift.displacement[i][3 * n] ==
            doctest::Approx(0.3 * times[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("temperature lifting: constant flux raises the mean linearly") {
  const Mesh mesh = build_box_mesh({1, 1, 1}, {2, 2, 2});
  const FESpace space(mesh);
  GivenData data;
  data.neumann_heat = [](const Vec3&, double, int) { return 0.5; };
  const double dt = 0.1;
  const auto lift = solve_lifting_temperature(space, data, dt, 5, LinearSolverConfig{});
  // Testing the weak form with 1: integral = t |bdry| g = 6 * 0.5 * t.
  for (size_t i = 0; i < lift.times.size(); ++i) {
    double integral = 0.0;
    for (int c = 0; c < space.n_cells(); ++c)
      for (int q = 0; q < FESpace::kQpPerCell; ++q)
        integral += space.qp(c, q).weight * space.scalar_at(c, q, lift.field[i]);
    CHECK(integral == doctest::Approx(3.0 * lift.times[i]).epsilon(1e-10));
  }
}

TEST_CASE("temperature lifting: zero flux stays zero") {
  const Mesh mesh = build_box_mesh({1, 1, 1}, {1, 1, 1});
  const FESpace space(mesh);
  GivenData data;
  const auto lift = solve_lifting_temperature(space, data, 0.1, 3, LinearSolverConfig{});
  for (const auto& f : lift.field) CHECK(f.norm() <= 1e-13);
}
