#include "nh/fe.hpp"

#include <cmath>

#include "nh/errors.hpp"

namespace nh {

namespace {

const double kCorner[8][3] = {
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
};

void shape_functions(const double xi[3], double n[8], double dn[8][3]) {
  for (int a = 0; a < 8; ++a) {
    const double* c = kCorner[a];
    const double fx = 1.0 + c[0] * xi[0];
    const double fy = 1.0 + c[1] * xi[1];
    const double fz = 1.0 + c[2] * xi[2];
    n[a] = 0.125 * fx * fy * fz;
    dn[a][0] = 0.125 * c[0] * fy * fz;
    dn[a][1] = 0.125 * fx * c[1] * fz;
    dn[a][2] = 0.125 * fx * fy * c[2];
  }
}

} // namespace

FESpace::FESpace(const Mesh& mesh) : mesh_(&mesh) {
  n_nodes_ = mesh.n_vertices();
  n_cells_ = mesh.n_cells();

  const double g = 1.0 / std::sqrt(3.0);
  double gauss[kQpPerCell][3];
  {
    int q = 0;
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i, ++q) {
          gauss[q][0] = (2 * i - 1) * g;
          gauss[q][1] = (2 * j - 1) * g;
          gauss[q][2] = (2 * k - 1) * g;
        }
  }

  qp_.resize(n_cells_ * kQpPerCell);
  for (int c = 0; c < n_cells_; ++c) {
    const auto& conn = mesh.cells[c];
    Eigen::Matrix<double, 8, 3> xs;
    for (int a = 0; a < 8; ++a)
      xs.row(a) = Eigen::Map<const Vec3>(mesh.vertices[conn[a]].data());

    for (int q = 0; q < kQpPerCell; ++q) {
      CellQp& d = qp_[c * kQpPerCell + q];
      double n[8], dn[8][3];
      shape_functions(gauss[q], n, dn);

      Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
      for (int a = 0; a < 8; ++a)
        for (int p = 0; p < 3; ++p)
          for (int r = 0; r < 3; ++r) jac(p, r) += xs(a, p) * dn[a][r];
      const double det = jac.determinant();
      if (!(det > 0.0))
        throw AssemblyError("nonpositive Jacobian in cell " + std::to_string(c));
      const Eigen::Matrix3d jinv_t = jac.inverse().transpose();

      d.weight = det; // gauss weights are 1
      d.x.setZero();
      for (int a = 0; a < 8; ++a) {
        d.shape[a] = n[a];
        const Vec3 gphys = jinv_t * Eigen::Map<const Vec3>(dn[a]);
        for (int p = 0; p < 3; ++p) d.grad[a][p] = gphys[p];
        d.x += n[a] * xs.row(a).transpose();
      }
    }
  }

  // 2x2 Gauss rule on each boundary face of the trilinear cell.
  face_qp_.reserve(mesh.boundary_faces.size() * kFaceQp);
  for (const auto& bf : mesh.boundary_faces) {
    const auto& conn = mesh.cells[bf.cell];
    int fnodes[4];
    Eigen::Matrix<double, 4, 3> xs;
    for (int a = 0; a < 4; ++a) {
      fnodes[a] = conn[kFaceNodes[bf.local_face][a]];
      xs.row(a) = Eigen::Map<const Vec3>(mesh.vertices[fnodes[a]].data());
    }
    const double sc[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int qj = 0; qj < 2; ++qj)
      for (int qi = 0; qi < 2; ++qi) {
        const double s = (2 * qi - 1) * g;
        const double t = (2 * qj - 1) * g;
        FaceQp f;
        f.tag = bf.tag;
        Vec3 ts = Vec3::Zero(), tt = Vec3::Zero();
        f.x.setZero();
        for (int a = 0; a < 4; ++a) {
          const double m = 0.25 * (1 + sc[a][0] * s) * (1 + sc[a][1] * t);
          const double ms = 0.25 * sc[a][0] * (1 + sc[a][1] * t);
          const double mt = 0.25 * (1 + sc[a][0] * s) * sc[a][1];
          f.nodes[a] = fnodes[a];
          f.shape[a] = m;
          f.x += m * xs.row(a).transpose();
          ts += ms * xs.row(a).transpose();
          tt += mt * xs.row(a).transpose();
        }
        f.weight = ts.cross(tt).norm();
        face_qp_.push_back(f);
      }
  }
}

Vec6 FESpace::strain_at(int cell, int q, const Eigen::VectorXd& u) const {
  static const double is2 = 1.0 / std::sqrt(2.0);
  const CellQp& d = qp(cell, q);
  const auto& conn = mesh_->cells[cell];
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero(); // displacement gradient
  for (int a = 0; a < 8; ++a) {
    const int n = conn[a];
    for (int p = 0; p < 3; ++p)
      for (int r = 0; r < 3; ++r) g(p, r) += u[3 * n + p] * d.grad[a][r];
  }
  Vec6 eps;
  eps << g(0, 0), g(1, 1), g(2, 2), is2 * (g(0, 1) + g(1, 0)),
      is2 * (g(1, 2) + g(2, 1)), is2 * (g(0, 2) + g(2, 0));
  return eps;
}

double FESpace::scalar_at(int cell, int q, const Eigen::VectorXd& v) const {
  const CellQp& d = qp(cell, q);
  const auto& conn = mesh_->cells[cell];
  double s = 0.0;
  for (int a = 0; a < 8; ++a) s += d.shape[a] * v[conn[a]];
  return s;
}

Vec3 FESpace::scalar_grad_at(int cell, int q, const Eigen::VectorXd& v) const {
  const CellQp& d = qp(cell, q);
  const auto& conn = mesh_->cells[cell];
  Vec3 g = Vec3::Zero();
  for (int a = 0; a < 8; ++a)
    for (int p = 0; p < 3; ++p) g[p] += d.grad[a][p] * v[conn[a]];
  return g;
}

Vec3 FESpace::vector_at(int cell, int q, const Eigen::VectorXd& u) const {
  const CellQp& d = qp(cell, q);
  const auto& conn = mesh_->cells[cell];
  Vec3 s = Vec3::Zero();
  for (int a = 0; a < 8; ++a)
    for (int p = 0; p < 3; ++p) s[p] += d.shape[a] * u[3 * conn[a] + p];
  return s;
}

Eigen::VectorXd FESpace::interpolate_vector(
    const std::function<Vec3(const Vec3&)>& f) const {
  Eigen::VectorXd u(n_displacement_dofs());
  for (int n = 0; n < n_nodes_; ++n) {
    const Vec3 x = Eigen::Map<const Vec3>(mesh_->vertices[n].data());
    u.segment<3>(3 * n) = f(x);
  }
  return u;
}

Eigen::VectorXd FESpace::interpolate_scalar(
    const std::function<double(const Vec3&)>& f) const {
  Eigen::VectorXd v(n_nodes_);
  for (int n = 0; n < n_nodes_; ++n)
    v[n] = f(Eigen::Map<const Vec3>(mesh_->vertices[n].data()));
  return v;
}

Eigen::Matrix<double, 6, 24> strain_matrix(const FESpace::CellQp& qp) {
  static const double is2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix<double, 6, 24> b = Eigen::Matrix<double, 6, 24>::Zero();
  for (int a = 0; a < 8; ++a) {
    const double gx = qp.grad[a][0], gy = qp.grad[a][1], gz = qp.grad[a][2];
    b(0, 3 * a + 0) = gx;
    b(1, 3 * a + 1) = gy;
    b(2, 3 * a + 2) = gz;
    b(3, 3 * a + 0) = is2 * gy;
    b(3, 3 * a + 1) = is2 * gx;
    b(4, 3 * a + 1) = is2 * gz;
    b(4, 3 * a + 2) = is2 * gy;
    b(5, 3 * a + 0) = is2 * gz;
    b(5, 3 * a + 2) = is2 * gx;
  }
  return b;
}

DirichletMap build_dirichlet_map(const Mesh& mesh) {
  DirichletMap map;
  const int n_dofs = 3 * mesh.n_vertices();
  map.constrained.assign(n_dofs, 0);
  std::vector<char> on_boundary(mesh.n_vertices(), 0);
  for (const auto& bf : mesh.boundary_faces)
    for (int a = 0; a < 4; ++a)
      on_boundary[mesh.cells[bf.cell][kFaceNodes[bf.local_face][a]]] = 1;

  for (int n = 0; n < mesh.n_vertices(); ++n)
    if (on_boundary[n]) {
      map.boundary_nodes.push_back(n);
      for (int p = 0; p < 3; ++p) map.constrained[3 * n + p] = 1;
    }

  map.free_index.assign(n_dofs, -1);
  for (int i = 0; i < n_dofs; ++i)
    if (!map.constrained[i]) {
      map.free_index[i] = static_cast<int>(map.free_dofs.size());
      map.free_dofs.push_back(i);
    }
  return map;
}

void apply_dirichlet(const FESpace& space, const DirichletMap& map,
                     const std::function<Vec3(const Vec3&, double)>& g_d,
                     double t, Eigen::VectorXd& u) {
  for (int n : map.boundary_nodes) {
    const Vec3 x = Eigen::Map<const Vec3>(space.mesh().vertices[n].data());
    u.segment<3>(3 * n) = g_d(x, t);
  }
}

} // namespace nh
