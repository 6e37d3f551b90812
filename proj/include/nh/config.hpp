#pragma once

#include <array>
#include <optional>
#include <string>

#include "json.hpp"
#include "nh/expression.hpp"
#include "nh/fields.hpp"
#include "nh/solver.hpp"

namespace nh {

struct MeshSection {
  bool from_file = false;
  std::string file;
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  std::array<int, 3> resolution{2, 2, 2};
};

struct DataSection {
  std::array<Expression, 3> body_force;
  std::array<Expression, 3> dirichlet;
  std::array<std::optional<Expression>, 3> dirichlet_rate; // optional analytic g_D,t
  Expression neumann_all;                    // used for faces without overrides
  std::array<std::optional<Expression>, 6> neumann_face;
  std::array<Expression, 3> u0;
  std::array<Expression, 6> initial_stress;  // xx yy zz xy yz xz
  Expression theta0;
  Expression heat_source;
  std::string u0_file;     // per-node table alternatives
  std::string theta0_file;
};

struct OutputSection {
  std::string directory = "out";
  int snapshot_stride = 1;
  bool vtk = true;
  bool csv = true;
};

struct MmsSection {
  std::array<Expression, 3> exact_u;
  Expression exact_theta;
};

struct MaterialPointSection {
  std::string path_file; // rows: t, six strain components, theta
};

struct RunConfig {
  MaterialModel material;
  // Expression sources for custom constitutive functions (round-trips).
  std::string f_expr;
  std::string beta_expr;
  MeshSection mesh;
  DataSection data;
  SolverConfig solver;
  OutputSection output;
  std::optional<MmsSection> mms;
  std::optional<MaterialPointSection> material_point;

  nlohmann::json to_json() const;
};

/// Parses and fully validates a run configuration; unknown keys are
/// rejected. Throws ConfigError with the offending key path.
RunConfig parse_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);

Mesh make_mesh(const RunConfig& config);

/// Binds the symbolic data entries (and optional nodal tables) into callable
/// fields. The space is needed only when nodal tables are used.
GivenData make_given_data(const RunConfig& config, const FESpace* space);

/// Echo of every physical parameter with units, one per line.
std::string describe_config(const RunConfig& config);

} // namespace nh
