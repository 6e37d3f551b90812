#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nh/diagnostics.hpp"

namespace nh {

struct LinearSolverConfig {
  enum class Kind { Direct, ConjugateGradient };
  Kind kind = Kind::Direct;
  double tol = 1e-10;
  int max_iter = 20000;
};

/// Solves the SPD system A x = b; throws LinearSolveFailure.
Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& a,
                             const Eigen::VectorXd& b,
                             const LinearSolverConfig& cfg);

struct SolverConfig {
  double dt = 0.05;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  enum class Coupling { Staggered, FixedPoint };
  Coupling coupling = Coupling::Staggered;
  double fixed_point_tol = 1e-10;
  int fixed_point_max_iter = 50;
  LinearSolverConfig linear;
  int snapshot_stride = 1;
  double audit_trunc_M = 0.0; // <= 0: use the model truncation level
  double bound_q = 1.2;

  int n_steps() const { return static_cast<int>(std::llround(t_end / dt)); }
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;                            // 0 .. t_end per step
  std::vector<EnergyLedger> ledgers;                    // one per step
  std::vector<std::pair<int, FieldsState>> snapshots;   // (step, state)

  const FieldsState* snapshot_at_step(int step) const {
    for (const auto& s : snapshots)
      if (s.first == step) return &s.second;
    return nullptr;
  }
};

struct StepOutput {
  FieldsState next;
  Eigen::VectorXd theta_star;        // temperature frozen in the mechanical solve
  Eigen::VectorXd momentum_residual; // full assembled residual at convergence
  int mech_iterations = 0;
  int heat_iterations = 0;
  int outer_iterations = 0;
};

/// One backward-Euler step. Staggered mode solves momentum+flow with theta
/// frozen at the previous level, then heat with the new stress and strain
/// rate; fixed-point mode iterates the pair until the temperature settles.
StepOutput step(const FESpace& space, const DirichletMap& dirichlet,
                const SolverConfig& config, const MaterialModel& model,
                const GivenData& data, const FieldsState& now, int step_index);

Trajectory run_simulation(const SolverConfig& config, const MaterialModel& model,
                          const GivenData& data, const Mesh& mesh);

/// Variant reusing a prebuilt space (mesh studies, parameter sweeps).
Trajectory run_simulation(const SolverConfig& config, const MaterialModel& model,
                          const GivenData& data, const FESpace& space,
                          const DirichletMap& dirichlet);

struct KStudyRow {
  double k = 0.0;
  bool ok = false;
  std::string error;
  BoundReport bounds;
  std::vector<EnergyLedger> ledgers;
};

struct KStudyPair {
  double k_lo = 0.0, k_hi = 0.0;
  double theta_c_l1 = 0.0; // max over snapshot times of int |theta_lo - theta_hi|
  double stress_l2 = 0.0;  // max over snapshot times of ||T_lo - T_hi||_{L^2}
  double disp_l2 = 0.0;    // max over snapshot times of ||u_lo - u_hi||_{L^2}
};

struct KStudy {
  std::vector<KStudyRow> rows;
  std::vector<KStudyPair> pairs;
  bool all_ok = true;
};

/// Runs the same problem for every truncation level in `k_list` (>= 3,
/// increasing) and tabulates Cauchy distances between consecutive runs.
/// Failures are recorded per level without aborting the table. `tweak`, when
/// set, may adjust the per-level configs (test hook); `workers` > 1 runs the
/// levels concurrently.
KStudy k_convergence_study(
    const SolverConfig& config, const MaterialModel& model, const GivenData& data,
    const Mesh& mesh, const std::vector<double>& k_list,
    const std::function<void(double, SolverConfig&, MaterialModel&)>& tweak = {},
    int workers = 1);

} // namespace nh
