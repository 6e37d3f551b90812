#include "nh/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nh/errors.hpp"

namespace nh {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // LF endings on every platform
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

} // namespace

void write_vtk_snapshot(const std::string& path, const FESpace& space,
                        const FieldsState& state, const MaterialModel& model) {
  std::ofstream out = open_out(path);
  const Mesh& mesh = space.mesh();
  out << "# vtk DataFile Version 3.0\n"
      << "thermo-visco-elastic state at t=" << format_double(state.time) << "\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v[0]) << " " << format_double(v[1]) << " "
        << format_double(v[2]) << "\n";
  out << "CELLS " << mesh.n_cells() << " " << mesh.n_cells() * 9 << "\n";
  for (const auto& c : mesh.cells) {
    out << 8;
    for (int a = 0; a < 8; ++a) out << " " << c[a];
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int c = 0; c < mesh.n_cells(); ++c) out << "12\n";

  out << "POINT_DATA " << mesh.n_vertices() << "\n";
  out << "VECTORS displacement double\n";
  for (int n = 0; n < mesh.n_vertices(); ++n)
    out << format_double(state.u[3 * n]) << " " << format_double(state.u[3 * n + 1])
        << " " << format_double(state.u[3 * n + 2]) << "\n";
  out << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < mesh.n_vertices(); ++n)
    out << format_double(state.theta[n]) << "\n";

  out << "CELL_DATA " << mesh.n_cells() << "\n";
  const char* names[6] = {"stress_xx", "stress_yy", "stress_zz",
                          "stress_xy", "stress_yz", "stress_xz"};
  for (int comp = 0; comp < 6; ++comp) {
    out << "SCALARS " << names[comp] << " double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double avg = 0.0;
      for (int q = 0; q < FESpace::kQpPerCell; ++q) {
        const SymTensor3& t = state.stress[c * FESpace::kQpPerCell + q];
        const double comps[6] = {t.xx, t.yy, t.zz, t.xy, t.yz, t.xz};
        avg += comps[comp];
      }
      out << format_double(avg / FESpace::kQpPerCell) << "\n";
    }
  }
  out << "SCALARS von_mises double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double avg = 0.0;
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      avg += state.stress[c * FESpace::kQpPerCell + q].deviator().norm();
    out << format_double(avg / FESpace::kQpPerCell) << "\n";
  }
  out << "SCALARS yield_excess double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double avg = 0.0;
    for (int q = 0; q < FESpace::kQpPerCell; ++q)
      avg += yield_excess(model, state.stress[c * FESpace::kQpPerCell + q],
                          space.scalar_at(c, q, state.theta));
    out << format_double(avg / FESpace::kQpPerCell) << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

void write_ledger_csv(const std::string& path,
                      const std::vector<EnergyLedger>& ledgers) {
  std::ofstream out = open_out(path);
  out << "step,time,elastic_energy,elastic_increment,viscous_dissipation,"
         "plastic_dissipation,regularization_dissipation,plastic_source_thermal,"
         "thermal_content,thermal_primitive,thermal_primitive_increment,"
         "thermal_gradient,heat_diffusion_pair,heat_source_weighted,"
         "external_power,boundary_heat,boundary_heat_weighted,coupling_exchange,"
         "coupling_heat,lifting_power,stress_power,strain_rate_sq,f_sq,"
         "flow_excess_r1,residual_mech,residual_flow,residual_heat,"
         "balance_residual\n";
  for (size_t i = 0; i < ledgers.size(); ++i) {
    const EnergyLedger& l = ledgers[i];
    out << (i + 1) << "," << format_double(l.time) << ","
        << format_double(l.elastic_energy) << "," << format_double(l.elastic_increment)
        << "," << format_double(l.viscous_dissipation) << ","
        << format_double(l.plastic_dissipation) << ","
        << format_double(l.regularization_dissipation) << ","
        << format_double(l.plastic_source_thermal) << ","
        << format_double(l.thermal_content) << "," << format_double(l.thermal_primitive)
        << "," << format_double(l.thermal_primitive_increment) << ","
        << format_double(l.thermal_gradient) << ","
        << format_double(l.heat_diffusion_pair) << ","
        << format_double(l.heat_source_weighted) << ","
        << format_double(l.external_power) << "," << format_double(l.boundary_heat)
        << "," << format_double(l.boundary_heat_weighted) << ","
        << format_double(l.coupling_exchange) << "," << format_double(l.coupling_heat)
        << "," << format_double(l.lifting_power) << "," << format_double(l.stress_power)
        << "," << format_double(l.strain_rate_sq) << "," << format_double(l.f_sq)
        << "," << format_double(l.flow_excess_r1) << ","
        << format_double(l.residual_mech) << "," << format_double(l.residual_flow)
        << "," << format_double(l.residual_heat) << ","
        << format_double(l.balance_residual) << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

void write_bounds_csv(const std::string& path, const BoundReport& r) {
  std::ofstream out = open_out(path);
  out << "quantity,value\n"
      << "sup_stress_l2," << format_double(r.sup_stress_l2) << "\n"
      << "sup_reg_l2r," << format_double(r.sup_reg_l2r) << "\n"
      << "strain_rate_sq_total," << format_double(r.strain_rate_sq_total) << "\n"
      << "sup_theta_l1," << format_double(r.sup_theta_l1) << "\n"
      << "theta_lq_w1q," << format_double(r.theta_lq_w1q) << "\n"
      << "q," << format_double(r.q) << "\n"
      << "f_l2l2," << format_double(r.f_l2l2) << "\n"
      << "flow_norm," << format_double(r.flow_norm) << "\n"
      << "reg_norm," << format_double(r.reg_norm) << "\n"
      << "sup_combined," << format_double(r.sup_combined) << "\n";
  if (!out) throw IoError("failed while writing " + path);
}

void write_kstudy_csv(const std::string& path, const KStudy& study) {
  std::ofstream out = open_out(path);
  out << "k,status,sup_stress_l2,sup_reg_l2r,strain_rate_sq_total,sup_theta_l1,"
         "theta_lq_w1q,reg_norm,sup_combined\n";
  for (const auto& row : study.rows) {
    out << format_double(row.k) << "," << (row.ok ? "ok" : "failed") << ","
        << format_double(row.bounds.sup_stress_l2) << ","
        << format_double(row.bounds.sup_reg_l2r) << ","
        << format_double(row.bounds.strain_rate_sq_total) << ","
        << format_double(row.bounds.sup_theta_l1) << ","
        << format_double(row.bounds.theta_lq_w1q) << ","
        << format_double(row.bounds.reg_norm) << ","
        << format_double(row.bounds.sup_combined) << "\n";
  }
  out << "k_lo,k_hi,theta_c_l1,stress_l2,disp_l2\n";
  for (const auto& p : study.pairs)
    out << format_double(p.k_lo) << "," << format_double(p.k_hi) << ","
        << format_double(p.theta_c_l1) << "," << format_double(p.stress_l2) << ","
        << format_double(p.disp_l2) << "\n";
  if (!out) throw IoError("failed while writing " + path);
}

void write_outputs(const RunConfig& config, const FESpace& space,
                   const MaterialModel& model, const Trajectory& trajectory) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir.string());

  if (config.output.vtk) {
    for (const auto& [step, state] : trajectory.snapshots) {
      char name[32];
      std::snprintf(name, sizeof(name), "state_%05d.vtk", step);
      write_vtk_snapshot((dir / name).string(), space, state, model);
    }
  }
  if (config.output.csv) {
    write_ledger_csv((dir / "ledger.csv").string(), trajectory.ledgers);
    write_bounds_csv((dir / "bounds.csv").string(),
                     apriori_bounds(space, model, trajectory, config.solver.bound_q));
  }
}

void write_lifting_outputs(const std::string& directory, const FESpace& space,
                           const DisplacementLifting& du,
                           const TemperatureLifting& dtheta) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir.string());

  const Mesh& mesh = space.mesh();
  for (size_t i = 0; i < du.times.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "lifting_%05zu.vtk", i);
    std::ofstream out = open_out((dir / name).string());
    out << "# vtk DataFile Version 3.0\n"
        << "auxiliary fields at t=" << format_double(du.times[i]) << "\n"
        << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (const auto& v : mesh.vertices)
      out << format_double(v[0]) << " " << format_double(v[1]) << " "
          << format_double(v[2]) << "\n";
    out << "CELLS " << mesh.n_cells() << " " << mesh.n_cells() * 9 << "\n";
    for (const auto& c : mesh.cells) {
      out << 8;
      for (int a = 0; a < 8; ++a) out << " " << c[a];
      out << "\n";
    }
    out << "CELL_TYPES " << mesh.n_cells() << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c) out << "12\n";
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    out << "VECTORS lifting_velocity double\n";
    for (int n = 0; n < mesh.n_vertices(); ++n)
      out << format_double(du.velocity[i][3 * n]) << " "
          << format_double(du.velocity[i][3 * n + 1]) << " "
          << format_double(du.velocity[i][3 * n + 2]) << "\n";
    out << "VECTORS lifting_displacement double\n";
    for (int n = 0; n < mesh.n_vertices(); ++n)
      out << format_double(du.displacement[i][3 * n]) << " "
          << format_double(du.displacement[i][3 * n + 1]) << " "
          << format_double(du.displacement[i][3 * n + 2]) << "\n";
    out << "SCALARS lifting_temperature double 1\nLOOKUP_TABLE default\n";
    const Eigen::VectorXd& th =
        i < dtheta.field.size() ? dtheta.field[i] : dtheta.field.back();
    for (int n = 0; n < mesh.n_vertices(); ++n) out << format_double(th[n]) << "\n";
  }
}

} // namespace nh
