// Acceptance suite: runs every shipped verification criterion at its stated
// tolerance and prints one pass/fail line per criterion.
//
// Usage: acceptance <configs-dir>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "nh/config.hpp"
#include "nh/lifting.hpp"
#include "nh/output.hpp"
#include "nh/solver.hpp"

using namespace nh;
namespace fs = std::filesystem;

namespace {

std::string g_config_dir;

RunConfig load(const std::string& name) {
  return parse_config(g_config_dir + "/" + name);
}

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string num(double v) { return format_double(v); }

SymTensor3 random_tensor(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

ElasticModuli random_moduli(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double mu = std::pow(10.0, -1.0 + 2.0 * u(rng));
  const double lam_lo = -2.0 * mu / 3.0 * 0.9;
  return {mu, lam_lo + (10.0 - lam_lo) * u(rng)};
}

// ---------------------------------------------------------------------------
// 1. Elasticity roundtrip.
void criterion_roundtrip() {
  std::mt19937 rng(2024);
  for (int m = 0; m < 100; ++m) {
    const ElasticModuli mod = random_moduli(rng);
    for (int i = 0; i < 100; ++i) {
      const SymTensor3 s = random_tensor(rng, 50.0);
      const double err = (hooke_inverse_apply(mod, hooke_apply(mod, s)) - s).norm();
      require(err <= 1e-12 * s.norm(),
              "roundtrip error " + num(err) + " for ||S|| = " + num(s.norm()));
    }
  }
}

// ---------------------------------------------------------------------------
// 2. Monotonicity of the inelastic vector field.
void criterion_monotonicity() {
  MaterialModel flow_only;
  flow_only.f_spec.kind = FSpec::Kind::Zero;
  flow_only.beta_spec.kind = BetaSpec::Kind::SmoothClampedLinear;
  flow_only.trunc_k = kInf;
  MaterialModel with_reg = flow_only;
  with_reg.trunc_k = 3.0;

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uth(-2.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const SymTensor3 s1 = random_tensor(rng, 3.0);
    const SymTensor3 s2 = random_tensor(rng, 3.0);
    const double theta = uth(rng);

    const double mono_flow = (flow_rate(flow_only, s1, theta) -
                              flow_rate(flow_only, s2, theta))
                                 .ddot(s1.deviator() - s2.deviator());
    require(mono_flow >= -1e-12, "flow monotonicity product " + num(mono_flow));

    const SymTensor3 g1 =
        flow_rate(with_reg, s1, theta) + regularization_rate(with_reg, s1);
    const SymTensor3 g2 =
        flow_rate(with_reg, s2, theta) + regularization_rate(with_reg, s2);
    const double mono_reg = (g1 - g2).ddot(s1.deviator() - s2.deviator());
    require(mono_reg >= -1e-12, "regularized monotonicity " + num(mono_reg));
    if ((s1.deviator() - s2.deviator()).norm() > 1e-8)
      require(mono_reg > 0.0, "strict monotonicity violated: " + num(mono_reg));

    require(g1.ddot(s1.deviator()) >= 0.0,
            "dissipation product negative: " + num(g1.ddot(s1.deviator())));
  }
}

// ---------------------------------------------------------------------------
// 3. Truncation operator and its primitive.
void criterion_truncation() {
  const double levels[] = {0.5, 1.7, 8.0};
  for (const double m : levels) {
    double prev2 = 0, prev1 = 0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = -20.0 + 40.0 * i / 1000.0;
      const double tx = truncate(m, x);
      require(std::abs(tx) <= std::min(std::abs(x), m) + 1e-15,
              "clamp bound violated at x = " + num(x));
      const double phi = truncation_primitive(m, x);
      require(phi + 1e-12 >= 0.5 * std::min(x * x, m * std::abs(x)),
              "primitive lower bound violated at x = " + num(x));
      if (i >= 2)
        require(prev2 + phi - 2.0 * prev1 >= -1e-12,
                "second difference negative at x = " + num(x));
      prev2 = prev1;
      prev1 = phi;
    }
  }
}

// ---------------------------------------------------------------------------
// 4. Zero-dimensional oracle equivalence.
void criterion_point_oracle() {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double dt = 5e-3;
  const int steps = 100;

  for (int draw = 0; draw < 20; ++draw) {
    MaterialModel m;
    m.moduli = ElasticModuli{0.5 + 1.5 * u01(rng), 0.5 + 1.5 * u01(rng)};
    m.r_exp = 1.5 + 1.5 * u01(rng);
    m.trunc_k = 4.0 + 6.0 * u01(rng);
    m.beta_spec.d = 0.2 + 0.8 * u01(rng);
    m.f_spec.kind = FSpec::Kind::Zero;
    m.newton_tol = 1e-12;
    const double theta = -1.0 + 3.0 * u01(rng);
    const SymTensor3 rate = random_tensor(rng, 0.3);

    auto rhs = [&](const SymTensor3& t) {
      return hooke_apply(m.moduli,
                         rate - flow_rate(m, t, theta) - regularization_rate(m, t));
    };
    auto rk4 = [&](SymTensor3 t, double h, int sub) {
      const double hs = h / sub;
      for (int i = 0; i < sub; ++i) {
        const SymTensor3 k1 = rhs(t);
        const SymTensor3 k2 = rhs(t + k1 * (hs / 2));
        const SymTensor3 k3 = rhs(t + k2 * (hs / 2));
        const SymTensor3 k4 = rhs(t + k3 * hs);
        t += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (hs / 6.0);
      }
      return t;
    };

    const SymTensor3 stress_rate = hooke_apply(m.moduli, rate);
    const double comps[6] = {stress_rate.xx, stress_rate.yy, stress_rate.zz,
                             stress_rate.xy, stress_rate.yz, stress_rate.xz};
    double scale = 0.0;
    for (double c : comps) scale = std::max(scale, std::abs(c));

    MaterialPointState st;
    st.temperature = theta;
    SymTensor3 oracle;
    double worst = 0.0;
    for (int i = 0; i < steps; ++i) {
      st.stress = material_point_step(m, st, rate, theta, dt);
      oracle = rk4(oracle, dt, 50);
      const SymTensor3 d = st.stress - oracle;
      const double errs[6] = {d.xx, d.yy, d.zz, d.xy, d.yz, d.xz};
      for (double e : errs) worst = std::max(worst, std::abs(e));
    }
    require(worst <= 5.0 * dt * scale,
            "draw " + std::to_string(draw) + ": componentwise error " + num(worst) +
                " vs bound " + num(5.0 * dt * scale));
  }
}

// ---------------------------------------------------------------------------
// 5. Patch tests.
void criterion_patch() {
  MaterialModel model;
  model.f_spec.kind = FSpec::Kind::Zero;
  model.beta_spec.d = 1e8;
  model.trunc_k = kInf;
  model.newton_tol = 1e-13;
  SolverConfig cfg;
  cfg.dt = 0.5;
  cfg.t_end = 0.5;
  cfg.newton_tol = 1e-13;

  const SymTensor3 a{0.02, -0.01, 0.03, 0.01, -0.005, 0.015};
  GivenData constant_stress;
  constant_stress.dirichlet = [&](const Vec3& x, double) {
    return Vec3(a.xx * x[0] + a.xy * x[1] + a.xz * x[2],
                a.xy * x[0] + a.yy * x[1] + a.yz * x[2],
                a.xz * x[0] + a.yz * x[1] + a.zz * x[2]);
  };
  GivenData rigid;
  rigid.dirichlet = [](const Vec3& x, double) {
    return Vec3(0.1 + 0.02 * x[1] - 0.03 * x[2], 0.2 - 0.02 * x[0] + 0.01 * x[2],
                -0.05 + 0.03 * x[0] - 0.01 * x[1]);
  };

  for (int res : {1, 2}) {
    const Mesh mesh = build_box_mesh({1, 1, 1}, {res, res, res});
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    {
      FieldsState st = initial_state(space, model, constant_stress);
      const StepOutput out = step(space, map, cfg, model, constant_stress, st, 0);
      const Eigen::VectorXd exact = space.interpolate_vector(
          [&](const Vec3& x) { return constant_stress.dirichlet(x, 0.5); });
      const double du = (out.next.u - exact).lpNorm<Eigen::Infinity>();
      require(du <= 1e-10, "constant-stress displacement error " + num(du));
      const SymTensor3 expect = hooke_apply(model.moduli, a);
      for (const SymTensor3& t : out.next.stress)
        require((t - expect).norm() <= 1e-10,
                "constant-stress stress error " + num((t - expect).norm()));
    }
    {
      FieldsState st = initial_state(space, model, rigid);
      const StepOutput out = step(space, map, cfg, model, rigid, st, 0);
      const Eigen::VectorXd exact = space.interpolate_vector(
          [&](const Vec3& x) { return rigid.dirichlet(x, 0.5); });
      const double du = (out.next.u - exact).lpNorm<Eigen::Infinity>();
      require(du <= 1e-10, "rigid-motion displacement error " + num(du));
      for (const SymTensor3& t : out.next.stress)
        require(t.norm() <= 1e-10, "rigid-motion stress " + num(t.norm()));
    }
  }
}

// ---------------------------------------------------------------------------
// 6. Manufactured-solution convergence rates.
void criterion_mms(std::ostream& log) {
  // Spatial sweep at fixed dt.
  RunConfig spatial = load("mms_spatial.json");
  std::vector<double> err_u, err_th;
  for (int level = 0; level < 3; ++level) {
    RunConfig c = spatial;
    for (int d = 0; d < 3; ++d)
      c.mesh.resolution[d] = spatial.mesh.resolution[d] << level;
    const Mesh mesh = make_mesh(c);
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    const GivenData data = make_given_data(c, &space);
    const Trajectory traj = run_simulation(c.solver, c.material, data, space, map);
    const MmsSection& m = *c.mms;
    const MmsErrors err = mms_error(
        space, traj,
        [&m](const Vec3& x, double t) {
          return Vec3(m.exact_u[0].eval(x[0], x[1], x[2], t),
                      m.exact_u[1].eval(x[0], x[1], x[2], t),
                      m.exact_u[2].eval(x[0], x[1], x[2], t));
        },
        [&m](const Vec3& x, double t) { return m.exact_theta.eval(x[0], x[1], x[2], t); },
        nullptr);
    err_u.push_back(err.u_l2);
    err_th.push_back(err.theta_l2);
  }
  const double rate_u = observed_rate(err_u[1], err_u[2]);
  const double rate_th = observed_rate(err_th[1], err_th[2]);
  log << "    spatial errors u: " << num(err_u[0]) << " " << num(err_u[1]) << " "
      << num(err_u[2]) << " (rate " << num(rate_u) << ")\n";
  log << "    spatial errors theta: " << num(err_th[0]) << " " << num(err_th[1])
      << " " << num(err_th[2]) << " (rate " << num(rate_th) << ")\n";
  require(rate_u >= 1.7 && rate_u <= 2.3, "spatial rate for u: " + num(rate_u));
  require(rate_th >= 1.7 && rate_th <= 2.3, "spatial rate for theta: " + num(rate_th));

  // Temporal sweep at a fixed mesh.
  RunConfig temporal = load("mms_temporal.json");
  std::vector<double> terr;
  for (int level = 0; level < 2; ++level) {
    RunConfig c = temporal;
    c.solver.dt = temporal.solver.dt / (1 << level);
    const Mesh mesh = make_mesh(c);
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    const GivenData data = make_given_data(c, &space);
    const Trajectory traj = run_simulation(c.solver, c.material, data, space, map);
    const MmsSection& m = *c.mms;
    const MmsErrors err = mms_error(
        space, traj,
        [&m](const Vec3& x, double t) {
          return Vec3(m.exact_u[0].eval(x[0], x[1], x[2], t),
                      m.exact_u[1].eval(x[0], x[1], x[2], t),
                      m.exact_u[2].eval(x[0], x[1], x[2], t));
        },
        [&m](const Vec3& x, double t) { return m.exact_theta.eval(x[0], x[1], x[2], t); },
        nullptr);
    terr.push_back(err.theta_l2);
  }
  const double rate_t = observed_rate(terr[0], terr[1]);
  log << "    temporal errors theta: " << num(terr[0]) << " " << num(terr[1])
      << " (rate " << num(rate_t) << ")\n";
  require(rate_t >= 0.8 && rate_t <= 1.2, "temporal rate: " + num(rate_t));
}

// ---------------------------------------------------------------------------
// 7. Energy audit on the shipped configs.
void criterion_energy_audit(std::ostream& log) {
  for (const char* name : {"elastic.json", "thermo_elastic.json", "yielding.json"}) {
    const RunConfig cfg = load(name);
    const Mesh mesh = make_mesh(cfg);
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    const GivenData data = make_given_data(cfg, &space);
    const Trajectory traj =
        run_simulation(cfg.solver, cfg.material, data, space, map);

    double worst = 0.0, worst_split = 0.0;
    for (const auto& l : traj.ledgers) {
      worst = std::max(worst, l.balance_residual);
      if (l.plastic_dissipation > 1e-8) {
        const double split =
            std::abs(l.plastic_source_thermal - l.plastic_dissipation) /
            l.plastic_dissipation;
        worst_split = std::max(worst_split, split);
      }
    }
    log << "    " << name << ": max balance residual " << num(worst)
        << ", max dissipation-route mismatch " << num(worst_split) << "\n";
    require(worst <= 1e-8, std::string(name) + ": balance residual " + num(worst));
    require(worst_split <= 1e-8,
            std::string(name) + ": dissipation routes differ by " + num(worst_split));
  }
}

// ---------------------------------------------------------------------------
// 8. Truncation-level sweep behaviour.
void criterion_k_sweep(std::ostream& log) {
  const RunConfig cfg = load("yielding.json");
  const Mesh mesh = make_mesh(cfg);
  const FESpace space(mesh);
  const GivenData data = make_given_data(cfg, &space);
  const std::vector<double> k_list{2, 4, 8, 16, 32};
  const KStudy study =
      k_convergence_study(cfg.solver, cfg.material, data, mesh, k_list, {}, 2);
  require(study.all_ok, "a sweep level failed");

  auto band = [&](auto pick, const std::string& what) {
    double lo = 1e300, hi = 0.0;
    for (const auto& row : study.rows) {
      const double v = pick(row.bounds);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    log << "    " << what << ": range [" << num(lo) << ", " << num(hi) << "]\n";
    require(hi <= 2.0 * lo, what + " varies by more than a factor 2: [" + num(lo) +
                                ", " + num(hi) + "]");
  };
  band([](const BoundReport& b) { return b.sup_stress_l2 * b.sup_stress_l2; },
       "sup ||T||^2");
  band([](const BoundReport& b) { return b.strain_rate_sq_total; },
       "int ||eps(u_t)||^2");
  band([](const BoundReport& b) { return b.sup_theta_l1; }, "sup int |theta|");
  band([](const BoundReport& b) { return b.sup_combined; }, "combined bound");

  // The k-scaled deviator norm is uniformly bounded and decays with k.
  for (size_t i = 0; i + 1 < study.rows.size(); ++i) {
    const double a = study.rows[i].bounds.sup_reg_l2r;
    const double b = study.rows[i + 1].bounds.sup_reg_l2r;
    require(b <= a * (1.0 + 1e-9),
            "(1/k)||devT||^{2r} grew from " + num(a) + " to " + num(b));
  }

  std::vector<double> theta_d, reg_n;
  for (const auto& p : study.pairs) theta_d.push_back(p.theta_c_l1);
  for (const auto& row : study.rows) reg_n.push_back(row.bounds.reg_norm);
  {
    std::ostringstream os;
    for (double v : theta_d) os << " " << num(v);
    log << "    theta Cauchy distances:" << os.str() << "\n";
  }
  {
    std::ostringstream os;
    for (double v : reg_n) os << " " << num(v);
    log << "    regularization norms:" << os.str() << "\n";
  }
  for (size_t i = 0; i + 1 < theta_d.size(); ++i)
    require(theta_d[i + 1] < theta_d[i],
            "theta Cauchy distances not monotone: " + num(theta_d[i]) + " -> " +
                num(theta_d[i + 1]));
  for (size_t i = 0; i + 1 < reg_n.size(); ++i)
    require(reg_n[i + 1] < reg_n[i], "regularization norm not decreasing: " +
                                         num(reg_n[i]) + " -> " + num(reg_n[i + 1]));
}

// ---------------------------------------------------------------------------
// 9. Lifting equivalence.
void criterion_lifting(std::ostream& log) {
  const RunConfig cfg = load("lifting.json");
  const Mesh mesh = make_mesh(cfg);
  const FESpace space(mesh);
  const DirichletMap map = build_dirichlet_map(mesh);
  const GivenData data = make_given_data(cfg, &space);

  const Trajectory direct =
      run_simulation(cfg.solver, cfg.material, data, space, map);

  std::vector<double> times;
  for (int i = 0; i <= cfg.solver.n_steps(); ++i) times.push_back(i * cfg.solver.dt);
  const DisplacementLifting du = solve_lifting_displacement(
      space, map, cfg.material.moduli, data, times, cfg.solver.linear);
  const TemperatureLifting dth = solve_lifting_temperature(
      space, data, cfg.solver.dt, cfg.solver.n_steps(), cfg.solver.linear);
  const Trajectory homog = run_simulation(
      cfg.solver, cfg.material, make_homogenized_data(data, du, dth), space, map);

  const Eigen::VectorXd diff = direct.snapshots.back().second.u -
                               (homog.snapshots.back().second.u +
                                du.displacement.back());
  const double err = diff.lpNorm<Eigen::Infinity>();
  log << "    displacement gap between routes: " << num(err) << "\n";
  require(err <= 1e-8, "direct vs lifted displacement gap " + num(err));
}

// ---------------------------------------------------------------------------
// 10. Determinism of the run outputs.
void criterion_determinism() {
  for (const char* name : {"elastic.json", "yielding.json"}) {
    const RunConfig cfg = load(name);
    const Mesh mesh = make_mesh(cfg);
    const FESpace space(mesh);
    const DirichletMap map = build_dirichlet_map(mesh);
    const GivenData data = make_given_data(cfg, &space);

    const fs::path dir = fs::temp_directory_path() / "nh_acceptance_det";
    fs::create_directories(dir);
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      const Trajectory traj =
          run_simulation(cfg.solver, cfg.material, data, space, map);
      const fs::path p = dir / ("ledger_" + std::to_string(rep) + ".csv");
      write_ledger_csv(p.string(), traj.ledgers);
      std::ifstream in(p, std::ios::binary);
      std::ostringstream os;
      os << in.rdbuf();
      files[rep] = os.str();
    }
    fs::remove_all(dir);
    require(!files[0].empty() && files[0] == files[1],
            std::string(name) + ": repeated runs differ");
  }
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <configs-dir>\n";
    return 2;
  }
  g_config_dir = argv[1];

  struct Entry {
    int id;
    const char* label;
    std::function<void(std::ostream&)> body;
  };
  const std::vector<Entry> entries = {
      {1, "elasticity roundtrip over random moduli and tensors",
       [](std::ostream&) { criterion_roundtrip(); }},
      {2, "monotonicity and dissipativity of the inelastic field",
       [](std::ostream&) { criterion_monotonicity(); }},
      {3, "truncation operator and primitive properties",
       [](std::ostream&) { criterion_truncation(); }},
      {4, "implicit point update against the explicit oracle",
       [](std::ostream&) { criterion_point_oracle(); }},
      {5, "constant-stress and rigid-motion patch tests",
       [](std::ostream&) { criterion_patch(); }},
      {6, "manufactured-solution convergence rates", criterion_mms},
      {7, "discrete energy audit on the shipped configs", criterion_energy_audit},
      {8, "truncation-level sweep behaviour", criterion_k_sweep},
      {9, "lifting equivalence of boundary-data handling", criterion_lifting},
      {10, "byte-identical outputs on repeated runs",
       [](std::ostream&) { criterion_determinism(); }},
  };

  int failures = 0;
  for (const auto& e : entries) {
    std::ostringstream detail;
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    try {
      e.body(detail);
    } catch (const Failure& f) {
      ok = false;
      why = f.what;
    } catch (const std::exception& ex) {
      ok = false;
      why = std::string("exception: ") + ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << e.id << ": " << e.label
              << " (" << format_double(secs) << " s)\n";
    if (!detail.str().empty()) std::cout << detail.str();
    if (!ok) {
      std::cout << "    reason: " << why << "\n";
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED\n"
                              : std::to_string(failures) + " CRITERIA FAILED\n");
  return failures == 0 ? 0 : 1;
}
