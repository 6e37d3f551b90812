#include "nh/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nh/errors.hpp"

namespace nh {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(path, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) bad(path + "." + key, "unknown key");
}

double get_number(const json& j, const std::string& path, const std::string& key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return kInf;
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& path, const std::string& key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) bad(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

std::string get_string(const json& j, const std::string& path, const std::string& key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) bad(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

Expression get_expr(const json& j, const std::string& path, const std::string& key,
                    const std::string& fallback) {
  std::string text = fallback;
  if (j.contains(key)) {
    if (!j.at(key).is_string()) bad(path + "." + key, "expected an expression string");
    text = j.at(key).get<std::string>();
  }
  try {
    return Expression::parse(text);
  } catch (const ConfigError& e) {
    bad(path + "." + key, e.what());
  }
}

template <size_t N>
std::array<Expression, N> get_expr_array(const json& j, const std::string& path,
                                         const std::string& key) {
  std::array<Expression, N> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != N)
    bad(path + "." + key, "expected an array of " + std::to_string(N) + " expressions");
  for (size_t i = 0; i < N; ++i) {
    if (!v[i].is_string()) bad(path + "." + key, "expected expression strings");
    try {
      out[i] = Expression::parse(v[i].get<std::string>());
    } catch (const ConfigError& e) {
      bad(path + "." + key + "[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

const char* kFaceNames[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};

MaterialModel parse_material(const json& j, RunConfig& cfg) {
  const std::string path = "material";
  check_keys(j, path,
             {"mu", "lambda", "r_exp", "trunc_k", "f", "beta", "newton_tol",
              "max_iter"});
  MaterialModel m;
  try {
    m.moduli = ElasticModuli{get_number(j, path, "mu", 1.0),
                             get_number(j, path, "lambda", 1.0)};
  } catch (const std::invalid_argument& e) {
    bad(path, e.what());
  }
  m.r_exp = get_number(j, path, "r_exp", 2.0);
  m.trunc_k = get_number(j, path, "trunc_k", kInf);
  m.newton_tol = get_number(j, path, "newton_tol", 1e-10);
  m.max_iter = get_int(j, path, "max_iter", 50);

  if (j.contains("f")) {
    const json& f = j.at("f");
    check_keys(f, path + ".f", {"kind", "a", "B", "B_tilde", "alpha", "expr"});
    const std::string kind = get_string(f, path + ".f", "kind", "power_law");
    if (kind == "power_law") m.f_spec.kind = FSpec::Kind::PowerLaw;
    else if (kind == "zero") m.f_spec.kind = FSpec::Kind::Zero;
    else if (kind == "expression") m.f_spec.kind = FSpec::Kind::Custom;
    else bad(path + ".f.kind", "must be power_law, zero or expression");
    m.f_spec.a = get_number(f, path + ".f", "a", 0.0);
    m.f_spec.B = get_number(f, path + ".f", "B", 1.0);
    m.f_spec.B_tilde = get_number(f, path + ".f", "B_tilde", 1.0);
    m.f_spec.alpha = get_number(f, path + ".f", "alpha", 0.7);
    if (m.f_spec.kind == FSpec::Kind::Custom) {
      const Expression e = get_expr(f, path + ".f", "expr", "0");
      cfg.f_expr = e.text();
      m.f_spec.custom_source = e.text();
      m.f_spec.custom = [e](double th) { return e.eval(0, 0, 0, 0, th); };
    }
  }
  if (j.contains("beta")) {
    const json& b = j.at("beta");
    check_keys(b, path + ".beta", {"kind", "d", "d_tilde", "expr"});
    const std::string kind = get_string(b, path + ".beta", "kind", "constant");
    if (kind == "constant") m.beta_spec.kind = BetaSpec::Kind::Constant;
    else if (kind == "smooth_clamped_linear")
      m.beta_spec.kind = BetaSpec::Kind::SmoothClampedLinear;
    else if (kind == "expression") m.beta_spec.kind = BetaSpec::Kind::Custom;
    else bad(path + ".beta.kind", "must be constant, smooth_clamped_linear or expression");
    m.beta_spec.d = get_number(b, path + ".beta", "d", 1.0);
    m.beta_spec.d_tilde = get_number(b, path + ".beta", "d_tilde", 1.0);
    if (m.beta_spec.kind == BetaSpec::Kind::Custom) {
      const Expression e = get_expr(b, path + ".beta", "expr", "0");
      cfg.beta_expr = e.text();
      m.beta_spec.custom_source = e.text();
      m.beta_spec.custom = [e](double th) { return e.eval(0, 0, 0, 0, th); };
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    bad(path, e.what());
  }
  return m;
}

MeshSection parse_mesh(const json& j) {
  MeshSection m;
  check_keys(j, "mesh", {"file", "extent", "resolution"});
  if (j.contains("file")) {
    m.from_file = true;
    m.file = get_string(j, "mesh", "file", "");
    if (j.contains("extent") || j.contains("resolution"))
      bad("mesh", "give either a file or extent/resolution, not both");
    return m;
  }
  if (j.contains("extent")) {
    const json& e = j.at("extent");
    if (!e.is_array() || e.size() != 3) bad("mesh.extent", "expected 3 numbers");
    for (int i = 0; i < 3; ++i) {
      if (!e[i].is_number() || !(e[i].get<double>() > 0.0))
        bad("mesh.extent", "entries must be positive numbers");
      m.extent[i] = e[i].get<double>();
    }
  }
  if (j.contains("resolution")) {
    const json& r = j.at("resolution");
    if (!r.is_array() || r.size() != 3) bad("mesh.resolution", "expected 3 integers");
    for (int i = 0; i < 3; ++i) {
      if (!r[i].is_number_integer() || r[i].get<int>() < 1)
        bad("mesh.resolution", "entries must be integers >= 1");
      m.resolution[i] = r[i].get<int>();
    }
  }
  return m;
}

DataSection parse_data(const json& j) {
  DataSection d;
  check_keys(j, "data",
             {"body_force", "g_d", "g_d_rate", "g_theta", "u0", "u0_file", "T0",
              "theta0", "theta0_file", "heat_source"});
  d.body_force = get_expr_array<3>(j, "data", "body_force");
  d.dirichlet = get_expr_array<3>(j, "data", "g_d");
  if (j.contains("g_d_rate")) {
    auto arr = get_expr_array<3>(j, "data", "g_d_rate");
    for (int i = 0; i < 3; ++i) d.dirichlet_rate[i] = arr[i];
  }
  if (j.contains("g_theta")) {
    const json& g = j.at("g_theta");
    if (g.is_string()) {
      d.neumann_all = get_expr(j, "data", "g_theta", "0");
    } else if (g.is_object()) {
      check_keys(g, "data.g_theta",
                 {kFaceNames[0], kFaceNames[1], kFaceNames[2], kFaceNames[3],
                  kFaceNames[4], kFaceNames[5]});
      for (int f = 0; f < 6; ++f)
        if (g.contains(kFaceNames[f]))
          d.neumann_face[f] = get_expr(g, "data.g_theta", kFaceNames[f], "0");
    } else {
      bad("data.g_theta", "expected an expression or a per-face object");
    }
  }
  d.u0 = get_expr_array<3>(j, "data", "u0");
  d.initial_stress = get_expr_array<6>(j, "data", "T0");
  d.theta0 = get_expr(j, "data", "theta0", "0");
  d.heat_source = get_expr(j, "data", "heat_source", "0");
  d.u0_file = get_string(j, "data", "u0_file", "");
  d.theta0_file = get_string(j, "data", "theta0_file", "");
  return d;
}

SolverConfig parse_solver(const json& j) {
  SolverConfig s;
  check_keys(j, "solver",
             {"dt", "t_end", "newton_tol", "newton_max_iter", "coupling",
              "fixed_point_tol", "fixed_point_max_iter", "linear_solver",
              "linear_tol", "linear_max_iter", "audit_trunc_M", "bound_q"});
  s.dt = get_number(j, "solver", "dt", 0.05);
  s.t_end = get_number(j, "solver", "t_end", 1.0);
  s.newton_tol = get_number(j, "solver", "newton_tol", 1e-10);
  s.newton_max_iter = get_int(j, "solver", "newton_max_iter", 50);
  const std::string coupling = get_string(j, "solver", "coupling", "staggered");
  if (coupling == "staggered") s.coupling = SolverConfig::Coupling::Staggered;
  else if (coupling == "fixed_point") s.coupling = SolverConfig::Coupling::FixedPoint;
  else bad("solver.coupling", "must be staggered or fixed_point");
  s.fixed_point_tol = get_number(j, "solver", "fixed_point_tol", 1e-10);
  s.fixed_point_max_iter = get_int(j, "solver", "fixed_point_max_iter", 50);
  const std::string lin = get_string(j, "solver", "linear_solver", "direct");
  if (lin == "direct") s.linear.kind = LinearSolverConfig::Kind::Direct;
  else if (lin == "conjugate_gradient")
    s.linear.kind = LinearSolverConfig::Kind::ConjugateGradient;
  else bad("solver.linear_solver", "must be direct or conjugate_gradient");
  s.linear.tol = get_number(j, "solver", "linear_tol", 1e-10);
  s.linear.max_iter = get_int(j, "solver", "linear_max_iter", 20000);
  s.audit_trunc_M = get_number(j, "solver", "audit_trunc_M", 0.0);
  s.bound_q = get_number(j, "solver", "bound_q", 1.2);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    bad("solver", e.what());
  }
  return s;
}

OutputSection parse_output(const json& j) {
  OutputSection o;
  check_keys(j, "output", {"directory", "snapshot_stride", "vtk", "csv"});
  o.directory = get_string(j, "output", "directory", "out");
  o.snapshot_stride = get_int(j, "output", "snapshot_stride", 1);
  if (o.snapshot_stride < 1) bad("output.snapshot_stride", "must be >= 1");
  if (j.contains("vtk")) {
    if (!j.at("vtk").is_boolean()) bad("output.vtk", "expected a boolean");
    o.vtk = j.at("vtk").get<bool>();
  }
  if (j.contains("csv")) {
    if (!j.at("csv").is_boolean()) bad("output.csv", "expected a boolean");
    o.csv = j.at("csv").get<bool>();
  }
  return o;
}

} // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  check_keys(j, "(root)",
             {"material", "mesh", "data", "solver", "output", "mms",
              "material_point"});
  if (j.contains("material")) cfg.material = parse_material(j.at("material"), cfg);
  else cfg.material.validate();
  if (j.contains("mesh")) cfg.mesh = parse_mesh(j.at("mesh"));
  if (j.contains("data")) cfg.data = parse_data(j.at("data"));
  if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  if (j.contains("output")) cfg.output = parse_output(j.at("output"));
  cfg.solver.snapshot_stride = cfg.output.snapshot_stride;
  if (j.contains("mms")) {
    const json& m = j.at("mms");
    check_keys(m, "mms", {"exact_u", "exact_theta"});
    MmsSection s;
    s.exact_u = get_expr_array<3>(m, "mms", "exact_u");
    s.exact_theta = get_expr(m, "mms", "exact_theta", "0");
    cfg.mms = s;
  }
  if (j.contains("material_point")) {
    const json& m = j.at("material_point");
    check_keys(m, "material_point", {"path_file"});
    MaterialPointSection s;
    s.path_file = get_string(m, "material_point", "path_file", "");
    if (s.path_file.empty()) bad("material_point.path_file", "required");
    cfg.material_point = s;
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  RunConfig cfg = config_from_json(j);

  // File references resolve relative to the config location.
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative())
      p = (base / p).string();
  };
  resolve(cfg.mesh.file);
  resolve(cfg.data.u0_file);
  resolve(cfg.data.theta0_file);
  if (cfg.material_point) resolve(cfg.material_point->path_file);
  return cfg;
}

json RunConfig::to_json() const {
  json j;
  json& m = j["material"];
  m["mu"] = material.moduli.mu;
  m["lambda"] = material.moduli.lambda;
  m["r_exp"] = material.r_exp;
  if (material.truncated()) m["trunc_k"] = material.trunc_k;
  else m["trunc_k"] = "inf";
  m["newton_tol"] = material.newton_tol;
  m["max_iter"] = material.max_iter;
  json& f = m["f"];
  switch (material.f_spec.kind) {
    case FSpec::Kind::PowerLaw: f["kind"] = "power_law"; break;
    case FSpec::Kind::Zero: f["kind"] = "zero"; break;
    case FSpec::Kind::Custom: f["kind"] = "expression"; f["expr"] = f_expr; break;
  }
  f["a"] = material.f_spec.a;
  f["B"] = material.f_spec.B;
  f["B_tilde"] = material.f_spec.B_tilde;
  f["alpha"] = material.f_spec.alpha;
  json& b = m["beta"];
  switch (material.beta_spec.kind) {
    case BetaSpec::Kind::Constant: b["kind"] = "constant"; break;
    case BetaSpec::Kind::SmoothClampedLinear: b["kind"] = "smooth_clamped_linear"; break;
    case BetaSpec::Kind::Custom: b["kind"] = "expression"; b["expr"] = beta_expr; break;
  }
  b["d"] = material.beta_spec.d;
  b["d_tilde"] = material.beta_spec.d_tilde;

  if (mesh.from_file) {
    j["mesh"]["file"] = mesh.file;
  } else {
    j["mesh"]["extent"] = mesh.extent;
    j["mesh"]["resolution"] = mesh.resolution;
  }

  json& d = j["data"];
  d["body_force"] = {data.body_force[0].text(), data.body_force[1].text(),
                     data.body_force[2].text()};
  d["g_d"] = {data.dirichlet[0].text(), data.dirichlet[1].text(),
              data.dirichlet[2].text()};
  if (data.dirichlet_rate[0])
    d["g_d_rate"] = {data.dirichlet_rate[0]->text(), data.dirichlet_rate[1]->text(),
                     data.dirichlet_rate[2]->text()};
  bool any_face = false;
  for (const auto& f2 : data.neumann_face) any_face = any_face || f2.has_value();
  if (any_face) {
    json g;
    for (int i = 0; i < 6; ++i)
      if (data.neumann_face[i]) g[kFaceNames[i]] = data.neumann_face[i]->text();
    d["g_theta"] = g;
  } else {
    d["g_theta"] = data.neumann_all.text();
  }
  d["u0"] = {data.u0[0].text(), data.u0[1].text(), data.u0[2].text()};
  d["T0"] = {data.initial_stress[0].text(), data.initial_stress[1].text(),
             data.initial_stress[2].text(), data.initial_stress[3].text(),
             data.initial_stress[4].text(), data.initial_stress[5].text()};
  d["theta0"] = data.theta0.text();
  d["heat_source"] = data.heat_source.text();
  if (!data.u0_file.empty()) d["u0_file"] = data.u0_file;
  if (!data.theta0_file.empty()) d["theta0_file"] = data.theta0_file;

  json& s = j["solver"];
  s["dt"] = solver.dt;
  s["t_end"] = solver.t_end;
  s["newton_tol"] = solver.newton_tol;
  s["newton_max_iter"] = solver.newton_max_iter;
  s["coupling"] = solver.coupling == SolverConfig::Coupling::Staggered
                      ? "staggered" : "fixed_point";
  s["fixed_point_tol"] = solver.fixed_point_tol;
  s["fixed_point_max_iter"] = solver.fixed_point_max_iter;
  s["linear_solver"] = solver.linear.kind == LinearSolverConfig::Kind::Direct
                           ? "direct" : "conjugate_gradient";
  s["linear_tol"] = solver.linear.tol;
  s["linear_max_iter"] = solver.linear.max_iter;
  s["audit_trunc_M"] = solver.audit_trunc_M;
  s["bound_q"] = solver.bound_q;

  json& o = j["output"];
  o["directory"] = output.directory;
  o["snapshot_stride"] = output.snapshot_stride;
  o["vtk"] = output.vtk;
  o["csv"] = output.csv;

  if (mms) {
    j["mms"]["exact_u"] = {mms->exact_u[0].text(), mms->exact_u[1].text(),
                           mms->exact_u[2].text()};
    j["mms"]["exact_theta"] = mms->exact_theta.text();
  }
  if (material_point) j["material_point"]["path_file"] = material_point->path_file;
  return j;
}

Mesh make_mesh(const RunConfig& config) {
  if (config.mesh.from_file) return read_mesh(config.mesh.file);
  return build_box_mesh(config.mesh.extent, config.mesh.resolution);
}

namespace {

Eigen::VectorXd read_nodal_table(const std::string& path, int nodes, int comps) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open nodal table: " + path);
  Eigen::VectorXd v(nodes * comps);
  for (int n = 0; n < nodes; ++n)
    for (int c = 0; c < comps; ++c)
      if (!(in >> v[comps * n + c]))
        throw ConfigError("nodal table too short (" + std::to_string(nodes) +
                          " rows of " + std::to_string(comps) + " expected): " + path);
  return v;
}

} // namespace

GivenData make_given_data(const RunConfig& config, const FESpace* space) {
  GivenData g;
  const DataSection d = config.data;

  g.body_force = [d](const Vec3& x, double t) {
    return Vec3(d.body_force[0].eval(x[0], x[1], x[2], t),
                d.body_force[1].eval(x[0], x[1], x[2], t),
                d.body_force[2].eval(x[0], x[1], x[2], t));
  };
  g.dirichlet = [d](const Vec3& x, double t) {
    return Vec3(d.dirichlet[0].eval(x[0], x[1], x[2], t),
                d.dirichlet[1].eval(x[0], x[1], x[2], t),
                d.dirichlet[2].eval(x[0], x[1], x[2], t));
  };
  if (d.dirichlet_rate[0]) {
    g.dirichlet_rate = [d](const Vec3& x, double t) {
      return Vec3(d.dirichlet_rate[0]->eval(x[0], x[1], x[2], t),
                  d.dirichlet_rate[1]->eval(x[0], x[1], x[2], t),
                  d.dirichlet_rate[2]->eval(x[0], x[1], x[2], t));
    };
  }
  g.neumann_heat = [d](const Vec3& x, double t, int tag) {
    if (tag >= 0 && tag < 6 && d.neumann_face[tag])
      return d.neumann_face[tag]->eval(x[0], x[1], x[2], t);
    return d.neumann_all.eval(x[0], x[1], x[2], t);
  };
  g.theta0 = [d](const Vec3& x) { return d.theta0.eval(x[0], x[1], x[2], 0.0); };
  g.u0 = [d](const Vec3& x) {
    return Vec3(d.u0[0].eval(x[0], x[1], x[2], 0.0),
                d.u0[1].eval(x[0], x[1], x[2], 0.0),
                d.u0[2].eval(x[0], x[1], x[2], 0.0));
  };
  g.T0 = [d](const Vec3& x) {
    SymTensor3 t;
    t.xx = d.initial_stress[0].eval(x[0], x[1], x[2], 0.0);
    t.yy = d.initial_stress[1].eval(x[0], x[1], x[2], 0.0);
    t.zz = d.initial_stress[2].eval(x[0], x[1], x[2], 0.0);
    t.xy = d.initial_stress[3].eval(x[0], x[1], x[2], 0.0);
    t.yz = d.initial_stress[4].eval(x[0], x[1], x[2], 0.0);
    t.xz = d.initial_stress[5].eval(x[0], x[1], x[2], 0.0);
    return t;
  };
  g.heat_source = [d](const Vec3& x, double t) {
    return d.heat_source.eval(x[0], x[1], x[2], t);
  };

  // Tabulated-per-node alternatives override the expressions.
  if (!d.u0_file.empty()) {
    if (!space) throw ConfigError("u0_file requires a built space");
    const Eigen::VectorXd table = read_nodal_table(d.u0_file, space->n_nodes(), 3);
    const Mesh& mesh = space->mesh();
    std::vector<std::array<double, 3>> verts = mesh.vertices;
    g.u0 = [table, verts](const Vec3& x) {
      for (size_t n = 0; n < verts.size(); ++n)
        if (std::abs(verts[n][0] - x[0]) + std::abs(verts[n][1] - x[1]) +
                std::abs(verts[n][2] - x[2]) < 1e-12)
          return Vec3(table[3 * n], table[3 * n + 1], table[3 * n + 2]);
      throw ConfigError("u0 table lookup at a non-nodal point");
    };
  }
  if (!d.theta0_file.empty()) {
    if (!space) throw ConfigError("theta0_file requires a built space");
    const Eigen::VectorXd table = read_nodal_table(d.theta0_file, space->n_nodes(), 1);
    const Mesh& mesh = space->mesh();
    std::vector<std::array<double, 3>> verts = mesh.vertices;
    g.theta0 = [table, verts](const Vec3& x) -> double {
      for (size_t n = 0; n < verts.size(); ++n)
        if (std::abs(verts[n][0] - x[0]) + std::abs(verts[n][1] - x[1]) +
                std::abs(verts[n][2] - x[2]) < 1e-12)
          return table[n];
      throw ConfigError("theta0 table lookup at a non-nodal point");
    };
  }
  return g;
}

std::string describe_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "material.mu            = " << c.material.moduli.mu << " Pa\n"
     << "material.lambda        = " << c.material.moduli.lambda << " Pa\n"
     << "material.r_exp         = " << c.material.r_exp << " (dimensionless)\n"
     << "material.trunc_k       = " << c.material.trunc_k << " (dimensionless)\n"
     << "material.f.a           = " << c.material.f_spec.a << " Pa\n"
     << "material.f.B           = " << c.material.f_spec.B << " Pa\n"
     << "material.f.B_tilde     = " << c.material.f_spec.B_tilde << " Pa\n"
     << "material.f.alpha       = " << c.material.f_spec.alpha << " (dimensionless)\n"
     << "material.beta.d        = " << c.material.beta_spec.d << " Pa\n"
     << "material.beta.d_tilde  = " << c.material.beta_spec.d_tilde << " Pa/K\n"
     << "solver.dt              = " << c.solver.dt << " s\n"
     << "solver.t_end           = " << c.solver.t_end << " s\n"
     << "solver.newton_tol      = " << c.solver.newton_tol << " (relative)\n";
  if (!c.mesh.from_file)
    os << "mesh.extent            = [" << c.mesh.extent[0] << ", " << c.mesh.extent[1]
       << ", " << c.mesh.extent[2] << "] m\n"
       << "mesh.resolution        = [" << c.mesh.resolution[0] << ", "
       << c.mesh.resolution[1] << ", " << c.mesh.resolution[2] << "] cells\n";
  else
    os << "mesh.file              = " << c.mesh.file << "\n";
  return os.str();
}

} // namespace nh
