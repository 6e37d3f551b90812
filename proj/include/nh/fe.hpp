#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nh/mesh.hpp"
#include "nh/tensor.hpp"

namespace nh {

using Vec3 = Eigen::Vector3d;

/// Trilinear nodal spaces on a hexahedral mesh with 2x2x2 Gauss quadrature:
/// vector-valued for displacement (dof = 3*node + component), scalar for
/// temperature (dof = node), and one stress tensor per quadrature point.
class FESpace {
public:
  static constexpr int kQpPerCell = 8;
  static constexpr int kFaceQp = 4;

  struct CellQp {
    double shape[8];
    double grad[8][3]; // physical gradients of nodal shape functions
    double weight;     // det(J) * gauss weight
    Vec3 x;            // physical position
  };

  struct FaceQp {
    int nodes[4]; // global node ids of the face corners
    double shape[4];
    double weight; // surface measure * gauss weight
    Vec3 x;
    int tag;
  };

  explicit FESpace(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int n_nodes() const { return n_nodes_; }
  int n_cells() const { return n_cells_; }
  int n_displacement_dofs() const { return 3 * n_nodes_; }
  int n_qp() const { return n_cells_ * kQpPerCell; }

  const CellQp& qp(int cell, int q) const { return qp_[cell * kQpPerCell + q]; }
  const std::vector<FaceQp>& face_qps() const { return face_qp_; }

  /// Symmetric gradient of the nodal displacement field at a quadrature
  /// point, in Mandel form.
  Vec6 strain_at(int cell, int q, const Eigen::VectorXd& u) const;

  double scalar_at(int cell, int q, const Eigen::VectorXd& v) const;
  Vec3 scalar_grad_at(int cell, int q, const Eigen::VectorXd& v) const;
  Vec3 vector_at(int cell, int q, const Eigen::VectorXd& u) const;

  /// Nodal interpolants of given fields.
  Eigen::VectorXd interpolate_vector(
      const std::function<Vec3(const Vec3&)>& f) const;
  Eigen::VectorXd interpolate_scalar(
      const std::function<double(const Vec3&)>& f) const;

private:
  const Mesh* mesh_;
  int n_nodes_ = 0;
  int n_cells_ = 0;
  std::vector<CellQp> qp_;
  std::vector<FaceQp> face_qp_;
};

/// Homogeneous-topology Dirichlet bookkeeping: every boundary node is
/// constrained in all three displacement components.
struct DirichletMap {
  std::vector<char> constrained; // per displacement dof
  std::vector<int> free_index;   // per displacement dof, -1 if constrained
  std::vector<int> free_dofs;
  std::vector<int> boundary_nodes;

  int n_free() const { return static_cast<int>(free_dofs.size()); }
};

DirichletMap build_dirichlet_map(const Mesh& mesh);

/// Strain-displacement matrix in Mandel form at one quadrature point:
/// eps_mandel = B * u_element with the 24 element dofs ordered node-major.
Eigen::Matrix<double, 6, 24> strain_matrix(const FESpace::CellQp& qp);

/// Writes the interpolant of g_D(x, t) into the constrained entries of u.
void apply_dirichlet(const FESpace& space, const DirichletMap& map,
                     const std::function<Vec3(const Vec3&, double)>& g_d,
                     double t, Eigen::VectorXd& u);

} // namespace nh
