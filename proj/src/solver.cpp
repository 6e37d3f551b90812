#include "nh/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <future>
#include <semaphore>
#include <sstream>

#include "nh/newton.hpp"

namespace nh {

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& a,
                             const Eigen::VectorXd& b,
                             const LinearSolverConfig& cfg) {
  if (cfg.kind == LinearSolverConfig::Kind::Direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(a);
    if (solver.info() != Eigen::Success)
      throw LinearSolveFailure("direct factorization failed");
    Eigen::VectorXd x = solver.solve(b);
    if (solver.info() != Eigen::Success)
      throw LinearSolveFailure("direct back-substitution failed");
    return x;
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(cfg.tol);
  cg.setMaxIterations(cfg.max_iter);
  cg.compute(a);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success) {
    std::ostringstream os;
    os << "conjugate gradients did not converge: error " << cg.error() << " after "
       << cg.iterations() << " iterations";
    throw LinearSolveFailure(os.str());
  }
  return x;
}

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("solver dt must be > 0");
  if (!(t_end >= dt)) throw std::invalid_argument("solver t_end must be >= dt");
  if (!(newton_tol > 0.0) || newton_max_iter < 1)
    throw std::invalid_argument("newton_tol must be > 0 and newton_max_iter >= 1");
  if (!(fixed_point_tol > 0.0) || fixed_point_max_iter < 1)
    throw std::invalid_argument("fixed-point tolerance/iterations invalid");
  if (!(linear.tol > 0.0) || linear.max_iter < 1)
    throw std::invalid_argument("linear solver tolerance/iterations invalid");
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
  if (!(bound_q > 1.0) || !(bound_q < 1.25))
    throw std::invalid_argument("bound_q must lie in (1, 5/4)");
}

namespace {

// Mechanical half-step: Newton on the free displacement dofs with the stress
// condensed at each quadrature point.
struct MechanicalSolve {
  Eigen::VectorXd u_next;
  std::vector<SymTensor3> stress;
  Eigen::VectorXd residual_full;
  int iterations = 0;
};

MechanicalSolve solve_mechanical(const StepInputs& in, const SolverConfig& config) {
  const DirichletMap& map = in.dirichlet;

  Eigen::VectorXd u_full = in.now.u;
  if (in.data.homogenized) {
    for (int n : map.boundary_nodes) u_full.segment<3>(3 * n).setZero();
  } else {
    apply_dirichlet(in.space, map, in.data.dirichlet, in.t_next, u_full);
  }

  auto scatter = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd u = u_full;
    for (int i = 0; i < map.n_free(); ++i) u[map.free_dofs[i]] = x[i];
    return u;
  };

  MomentumAssembly cache;
  int iterations = 0;
  auto residual = [&](const Eigen::VectorXd& x) {
    cache = assemble_momentum(in, scatter(x), false);
    return cache.residual_free;
  };
  auto direction = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
    ++iterations;
    MomentumAssembly full = assemble_momentum(in, scatter(x), true);
    return linear_solve(full.tangent, Eigen::VectorXd(-r), config.linear);
  };

  Eigen::VectorXd x0(map.n_free());
  for (int i = 0; i < map.n_free(); ++i) x0[i] = u_full[map.free_dofs[i]];

  const Eigen::VectorXd x = newton_solve<Eigen::VectorXd>(
      residual, direction, x0, config.newton_tol, config.newton_max_iter);

  MechanicalSolve out;
  out.u_next = scatter(x);
  out.stress = std::move(cache.stress);
  out.residual_full = std::move(cache.residual_full);
  out.iterations = iterations;
  return out;
}

struct HeatSolve {
  Eigen::VectorXd theta_next;
  int iterations = 0;
};

HeatSolve solve_heat(const StepInputs& in, const SolverConfig& config,
                     const Eigen::VectorXd& u_next,
                     const std::vector<double>& source_qp) {
  HeatAssembly cache;
  int iterations = 0;
  auto residual = [&](const Eigen::VectorXd& x) {
    return assemble_heat(in, x, u_next, source_qp, false).residual;
  };
  auto direction = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
    ++iterations;
    cache = assemble_heat(in, x, u_next, source_qp, true);
    return linear_solve(cache.tangent, Eigen::VectorXd(-r), config.linear);
  };
  HeatSolve out;
  out.theta_next = newton_solve<Eigen::VectorXd>(
      residual, direction, in.now.theta, config.newton_tol, config.newton_max_iter);
  out.iterations = iterations;
  return out;
}

} // namespace

StepOutput step(const FESpace& space, const DirichletMap& dirichlet,
                const SolverConfig& config, const MaterialModel& model,
                const GivenData& data, const FieldsState& now, int step_index) {
  const double t_next = now.time + config.dt;

  StepOutput out;
  Eigen::VectorXd theta_star = now.theta;

  const int max_outer =
      config.coupling == SolverConfig::Coupling::Staggered ? 1
                                                           : config.fixed_point_max_iter;
  for (int outer = 0; outer < max_outer; ++outer) {
    const StepInputs in{space,      dirichlet, model, data, now,
                        theta_star, t_next,    config.dt, step_index};

    MechanicalSolve mech = solve_mechanical(in, config);
    const std::vector<double> source = dissipation_source_qp(in, mech.stress);
    HeatSolve heat = solve_heat(in, config, mech.u_next, source);

    out.next.u = std::move(mech.u_next);
    out.next.theta = std::move(heat.theta_next);
    out.next.stress = std::move(mech.stress);
    out.next.time = t_next;
    out.theta_star = theta_star;
    out.momentum_residual = std::move(mech.residual_full);
    out.mech_iterations += mech.iterations;
    out.heat_iterations += heat.iterations;
    out.outer_iterations = outer + 1;

    if (config.coupling == SolverConfig::Coupling::Staggered) return out;
    const double delta = (out.next.theta - theta_star).norm();
    if (delta < config.fixed_point_tol) return out;
    theta_star = out.next.theta;
  }
  throw NonConvergence("fixed-point coupling loop exhausted its iterations");
}

Trajectory run_simulation(const SolverConfig& config, const MaterialModel& model,
                          const GivenData& data, const FESpace& space,
                          const DirichletMap& dirichlet) {
  config.validate();
  model.validate();
  if (!validate_material(model, 200).all_pass)
    throw std::invalid_argument(
        "material functions violate the admissibility conditions; run "
        "validate_material for the per-check report");

  Trajectory traj;
  FieldsState state = initial_state(space, model, data);
  traj.times.push_back(0.0);
  traj.snapshots.emplace_back(0, state);

  const int n_steps = config.n_steps();
  const double trunc_m =
      config.audit_trunc_M > 0.0 ? config.audit_trunc_M : model.trunc_k;

  for (int i = 0; i < n_steps; ++i) {
    StepOutput out;
    try {
      out = step(space, dirichlet, config, model, data, state, i);
    } catch (const NonConvergence& e) {
      std::ostringstream os;
      os << "t = " << state.time + config.dt << ": " << e.what();
      throw NonConvergence(os.str());
    } catch (const LinearSolveFailure& e) {
      std::ostringstream os;
      os << "t = " << state.time + config.dt << ": " << e.what();
      throw LinearSolveFailure(os.str());
    }

    const StepInputs in{space,         dirichlet, model,     data, state,
                        out.theta_star, out.next.time, config.dt, i};
    traj.ledgers.push_back(
        energy_audit(in, out.next, out.momentum_residual, trunc_m));
    traj.times.push_back(out.next.time);

    state = std::move(out.next);
    if ((i + 1) % config.snapshot_stride == 0 || i + 1 == n_steps)
      traj.snapshots.emplace_back(i + 1, state);
  }
  return traj;
}

Trajectory run_simulation(const SolverConfig& config, const MaterialModel& model,
                          const GivenData& data, const Mesh& mesh) {
  const FESpace space(mesh);
  const DirichletMap dirichlet = build_dirichlet_map(mesh);
  return run_simulation(config, model, data, space, dirichlet);
}

namespace {

double l1_distance(const FESpace& space, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  double total = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      total += space.qp(c, q).weight *
               std::abs(space.scalar_at(c, q, a) - space.scalar_at(c, q, b));
  return total;
}

double stress_l2_distance(const FESpace& space, const std::vector<SymTensor3>& a,
                          const std::vector<SymTensor3>& b) {
  double total = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q) {
      const int i = c * FESpace::kQpPerCell + q;
      const SymTensor3 d = a[i] - b[i];
      total += space.qp(c, q).weight * d.ddot(d);
    }
  return std::sqrt(total);
}

double disp_l2_distance(const FESpace& space, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b) {
  double total = 0.0;
  for (int c = 0; c < space.n_cells(); ++c)
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      total += space.qp(c, q).weight *
               (space.vector_at(c, q, a) - space.vector_at(c, q, b)).squaredNorm();
  return std::sqrt(total);
}

} // namespace

KStudy k_convergence_study(
    const SolverConfig& config, const MaterialModel& model, const GivenData& data,
    const Mesh& mesh, const std::vector<double>& k_list,
    const std::function<void(double, SolverConfig&, MaterialModel&)>& tweak,
    int workers) {
  if (k_list.size() < 3)
    throw std::invalid_argument("k_convergence_study needs at least 3 levels");
  for (size_t i = 0; i + 1 < k_list.size(); ++i)
    if (!(k_list[i] < k_list[i + 1]))
      throw std::invalid_argument("k_list must be strictly increasing");

  const FESpace space(mesh);
  const DirichletMap dirichlet = build_dirichlet_map(mesh);

  struct RunSlot {
    KStudyRow row;
    std::optional<Trajectory> traj;
  };
  std::vector<RunSlot> slots(k_list.size());

  auto run_one = [&](size_t idx) {
    RunSlot slot;
    slot.row.k = k_list[idx];
    SolverConfig cfg = config;
    MaterialModel mat = model;
    mat.trunc_k = k_list[idx];
    if (tweak) tweak(k_list[idx], cfg, mat);
    try {
      Trajectory t = run_simulation(cfg, mat, data, space, dirichlet);
      slot.row.bounds = apriori_bounds(space, mat, t, cfg.bound_q);
      slot.row.ledgers = t.ledgers;
      slot.row.ok = true;
      slot.traj = std::move(t);
    } catch (const std::exception& e) {
      slot.row.ok = false;
      slot.row.error = e.what();
    }
    return slot;
  };

  if (workers <= 1) {
    for (size_t i = 0; i < k_list.size(); ++i) slots[i] = run_one(i);
  } else {
    std::counting_semaphore<64> gate(std::min(workers, 64));
    std::vector<std::future<RunSlot>> futures(k_list.size());
    for (size_t i = 0; i < k_list.size(); ++i)
      futures[i] = std::async(std::launch::async, [&, i] {
        gate.acquire();
        RunSlot s = run_one(i);
        gate.release();
        return s;
      });
    for (size_t i = 0; i < k_list.size(); ++i) slots[i] = futures[i].get();
  }

  KStudy study;
  for (auto& s : slots) {
    study.all_ok = study.all_ok && s.row.ok;
    study.rows.push_back(s.row);
  }

  for (size_t i = 0; i + 1 < slots.size(); ++i) {
    if (!slots[i].traj || !slots[i + 1].traj) continue;
    const Trajectory& lo = *slots[i].traj;
    const Trajectory& hi = *slots[i + 1].traj;
    KStudyPair pair;
    pair.k_lo = k_list[i];
    pair.k_hi = k_list[i + 1];
    const size_t n = std::min(lo.snapshots.size(), hi.snapshots.size());
    for (size_t s = 0; s < n; ++s) {
      const FieldsState& a = lo.snapshots[s].second;
      const FieldsState& b = hi.snapshots[s].second;
      pair.theta_c_l1 = std::max(pair.theta_c_l1, l1_distance(space, a.theta, b.theta));
      pair.stress_l2 = std::max(pair.stress_l2,
                                stress_l2_distance(space, a.stress, b.stress));
      pair.disp_l2 = std::max(pair.disp_l2, disp_l2_distance(space, a.u, b.u));
    }
    study.pairs.push_back(pair);
  }
  return study;
}

} // namespace nh
