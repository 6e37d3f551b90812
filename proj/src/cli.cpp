#include "nh/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"
#include "nh/config.hpp"
#include "nh/errors.hpp"
#include "nh/output.hpp"

namespace nh {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::string output_dir;
  int workers = 1;
  long long seed = 0; // reserved; every algorithm is deterministic
  int snapshot_stride = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("config", opt.config_path, "run configuration file")->required();
  cmd->add_option("--output-dir", opt.output_dir, "override output.directory");
  cmd->add_option("--workers", opt.workers, "worker pool size for sweeps");
  cmd->add_option("--seed", opt.seed, "reserved (all algorithms deterministic)");
  cmd->add_option("--snapshot-stride", opt.snapshot_stride,
                  "override output.snapshot_stride");
}

RunConfig load_config(const CommonOptions& opt) {
  RunConfig cfg = parse_config(opt.config_path);
  if (!opt.output_dir.empty()) cfg.output.directory = opt.output_dir;
  if (opt.snapshot_stride > 0) {
    cfg.output.snapshot_stride = opt.snapshot_stride;
    cfg.solver.snapshot_stride = opt.snapshot_stride;
  }
  return cfg;
}

void require_admissible_material(const MaterialModel& model) {
  const MaterialReport report = validate_material(model, 500);
  for (const auto& c : report.checks)
    std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name
              << "  (worst ratio " << format_double(c.worst_ratio) << ")\n";
  if (!report.all_pass)
    throw ConfigError("material admissibility checks failed");
}

int cmd_run(const CommonOptions& opt) {
  const RunConfig cfg = load_config(opt);
  std::cout << describe_config(cfg);
  const Mesh mesh = make_mesh(cfg);
  const FESpace space(mesh);
  const DirichletMap dirichlet = build_dirichlet_map(mesh);
  const GivenData data = make_given_data(cfg, &space);
  require_admissible_material(cfg.material);

  const Trajectory traj =
      run_simulation(cfg.solver, cfg.material, data, space, dirichlet);
  write_outputs(cfg, space, cfg.material, traj);

  double worst = 0.0;
  for (const auto& l : traj.ledgers) worst = std::max(worst, l.balance_residual);
  std::cout << "steps completed       = " << traj.ledgers.size() << "\n"
            << "final time            = " << format_double(traj.times.back()) << " s\n"
            << "max balance residual  = " << format_double(worst) << "\n"
            << "outputs written to    = " << cfg.output.directory << "\n";
  return 0;
}

int cmd_material_point(const CommonOptions& opt) {
  const RunConfig cfg = load_config(opt);
  if (!cfg.material_point)
    throw ConfigError("material-point requires a material_point config section");

  std::ifstream in(cfg.material_point->path_file);
  if (!in)
    throw ConfigError("cannot open strain/temperature path table: " +
                      cfg.material_point->path_file);

  struct Row {
    double t;
    SymTensor3 strain;
    double theta;
  };
  std::vector<Row> rows;
  Row r;
  while (in >> r.t >> r.strain.xx >> r.strain.yy >> r.strain.zz >> r.strain.xy >>
         r.strain.yz >> r.strain.xz >> r.theta)
    rows.push_back(r);
  if (rows.size() < 2)
    throw ConfigError("path table needs at least two rows (t, 6 strain, theta)");

  fs::create_directories(cfg.output.directory);
  std::ofstream out(fs::path(cfg.output.directory) / "material_point.csv",
                    std::ios::binary);
  out << "time,stress_xx,stress_yy,stress_zz,stress_xy,stress_yz,stress_xz,"
         "dev_norm,yield_excess\n";

  MaterialPointState state; // stress path starts unloaded
  state.temperature = rows[0].theta;
  state.time = rows[0].t;
  auto emit = [&](const MaterialPointState& s) {
    out << format_double(s.time) << "," << format_double(s.stress.xx) << ","
        << format_double(s.stress.yy) << "," << format_double(s.stress.zz) << ","
        << format_double(s.stress.xy) << "," << format_double(s.stress.yz) << ","
        << format_double(s.stress.xz) << ","
        << format_double(s.stress.deviator().norm()) << ","
        << format_double(yield_excess(cfg.material, s.stress, s.temperature)) << "\n";
  };
  emit(state);
  for (size_t i = 1; i < rows.size(); ++i) {
    const double dt = rows[i].t - rows[i - 1].t;
    if (!(dt > 0.0)) throw ConfigError("path table times must be increasing");
    const SymTensor3 rate = (rows[i].strain - rows[i - 1].strain) * (1.0 / dt);
    state.stress = material_point_step(cfg.material, state, rate, rows[i].theta, dt);
    state.temperature = rows[i].theta;
    state.time = rows[i].t;
    emit(state);
  }
  std::cout << "material point path: " << rows.size() - 1 << " steps written to "
            << (fs::path(cfg.output.directory) / "material_point.csv").string()
            << "\n";
  return 0;
}

int cmd_study_k(const CommonOptions& opt, const std::vector<double>& k_list) {
  const RunConfig cfg = load_config(opt);
  const Mesh mesh = make_mesh(cfg);
  const FESpace space(mesh);
  const GivenData data = make_given_data(cfg, &space);
  require_admissible_material(cfg.material);

  const KStudy study = k_convergence_study(cfg.solver, cfg.material, data, mesh,
                                           k_list, {}, opt.workers);

  fs::create_directories(cfg.output.directory);
  for (const auto& row : study.rows) {
    if (!row.ok) {
      std::cerr << "k = " << row.k << " failed: " << row.error << "\n";
      continue;
    }
    std::ostringstream name;
    name << "ledger_k" << row.k << ".csv";
    write_ledger_csv((fs::path(cfg.output.directory) / name.str()).string(),
                     row.ledgers);
  }
  write_kstudy_csv((fs::path(cfg.output.directory) / "k_study.csv").string(), study);
  for (const auto& p : study.pairs)
    std::cout << "k " << p.k_lo << " -> " << p.k_hi
              << ": C([0,T];L1) theta distance " << format_double(p.theta_c_l1)
              << ", stress L2 " << format_double(p.stress_l2) << ", displacement L2 "
              << format_double(p.disp_l2) << "\n";
  return study.all_ok ? 0 : 1;
}

int cmd_study_mesh(const CommonOptions& opt, int levels) {
  RunConfig cfg = load_config(opt);
  if (cfg.mesh.from_file)
    throw ConfigError("study-mesh requires a box mesh configuration");
  if (levels < 2) throw ConfigError("study-mesh needs --levels >= 2");

  fs::create_directories(cfg.output.directory);
  std::ofstream out(fs::path(cfg.output.directory) / "mesh_study.csv",
                    std::ios::binary);
  out << "level,cells_per_axis,err_u_l2,err_theta_l2,rate_u,rate_theta\n";

  double prev_u = 0.0, prev_th = 0.0;
  for (int level = 0; level < levels; ++level) {
    RunConfig c = cfg;
    for (int d = 0; d < 3; ++d) c.mesh.resolution[d] = cfg.mesh.resolution[d] << level;
    const Mesh mesh = make_mesh(c);
    const FESpace space(mesh);
    const DirichletMap dirichlet = build_dirichlet_map(mesh);
    const GivenData data = make_given_data(c, &space);
    const Trajectory traj =
        run_simulation(c.solver, c.material, data, space, dirichlet);

    double eu = 0.0, eth = 0.0, ru = 0.0, rth = 0.0;
    if (c.mms) {
      const MmsSection& m = *c.mms;
      const MmsErrors err = mms_error(
          space, traj,
          [&m](const Vec3& x, double t) {
            return Vec3(m.exact_u[0].eval(x[0], x[1], x[2], t),
                        m.exact_u[1].eval(x[0], x[1], x[2], t),
                        m.exact_u[2].eval(x[0], x[1], x[2], t));
          },
          [&m](const Vec3& x, double t) {
            return m.exact_theta.eval(x[0], x[1], x[2], t);
          },
          nullptr);
      eu = err.u_l2;
      eth = err.theta_l2;
      if (level > 0) {
        ru = observed_rate(prev_u, eu);
        rth = observed_rate(prev_th, eth);
      }
      prev_u = eu;
      prev_th = eth;
    }
    out << level << "," << c.mesh.resolution[0] << "," << format_double(eu) << ","
        << format_double(eth) << "," << format_double(ru) << ","
        << format_double(rth) << "\n";
    std::cout << "level " << level << " (" << c.mesh.resolution[0]
              << " cells/axis): err_u " << format_double(eu) << ", err_theta "
              << format_double(eth) << ", rates " << format_double(ru) << " / "
              << format_double(rth) << "\n";
  }
  return 0;
}

int cmd_validate_material(const CommonOptions& opt) {
  const RunConfig cfg = load_config(opt);
  const MaterialReport report = validate_material(cfg.material, 500);
  for (const auto& c : report.checks)
    std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name << "  (worst ratio "
              << format_double(c.worst_ratio) << ")\n";
  return report.all_pass ? 0 : 1;
}

int cmd_lifting(const CommonOptions& opt) {
  const RunConfig cfg = load_config(opt);
  const Mesh mesh = make_mesh(cfg);
  const FESpace space(mesh);
  const DirichletMap dirichlet = build_dirichlet_map(mesh);
  const GivenData data = make_given_data(cfg, &space);

  std::vector<double> times;
  for (int i = 0; i <= cfg.solver.n_steps(); ++i) times.push_back(i * cfg.solver.dt);
  const DisplacementLifting du = solve_lifting_displacement(
      space, dirichlet, cfg.material.moduli, data, times, cfg.solver.linear);
  const TemperatureLifting dth = solve_lifting_temperature(
      space, data, cfg.solver.dt, cfg.solver.n_steps(), cfg.solver.linear);
  write_lifting_outputs(cfg.output.directory, space, du, dth);
  std::cout << "lifting fields written to " << cfg.output.directory << "\n";
  return 0;
}

} // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"quasi-static thermo-visco-elastic solver with power-law "
               "viscoplasticity, truncation regularization and energy diagnostics"};
  app.require_subcommand(1);

  CommonOptions run_opt, mp_opt, sk_opt, sm_opt, vm_opt, lift_opt;
  std::vector<double> k_list;
  int levels = 2;

  add_common(app.add_subcommand("run", "advance the coupled system and write outputs"),
             run_opt);
  add_common(app.add_subcommand("material-point",
                                "drive a single material point along a strain path"),
             mp_opt);
  CLI::App* sk = app.add_subcommand("study-k", "truncation-level sweep");
  add_common(sk, sk_opt);
  sk->add_option("--k-list", k_list, "increasing truncation levels (>= 3)")
      ->required()
      ->expected(-3);
  CLI::App* sm = app.add_subcommand("study-mesh", "mesh refinement study");
  add_common(sm, sm_opt);
  sm->add_option("--levels", levels, "number of refinement levels");
  add_common(app.add_subcommand("validate-material",
                                "check the constitutive admissibility conditions"),
             vm_opt);
  add_common(app.add_subcommand("lifting", "solve the auxiliary boundary-data fields"),
             lift_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_opt);
    if (app.got_subcommand("material-point")) return cmd_material_point(mp_opt);
    if (app.got_subcommand("study-k")) return cmd_study_k(sk_opt, k_list);
    if (app.got_subcommand("study-mesh")) return cmd_study_mesh(sm_opt, levels);
    if (app.got_subcommand("validate-material")) return cmd_validate_material(vm_opt);
    if (app.got_subcommand("lifting")) return cmd_lifting(lift_opt);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

} // namespace nh
