#include "nh/mesh.hpp"

#include <fstream>
#include <sstream>

#include "nh/errors.hpp"

namespace nh {

const int kFaceNodes[6][4] = {
    {0, 3, 7, 4}, // x min
    {1, 2, 6, 5}, // x max
    {0, 1, 5, 4}, // y min
    {3, 2, 6, 7}, // y max
    {0, 1, 2, 3}, // z min
    {4, 5, 6, 7}, // z max
};

Mesh build_box_mesh(const std::array<double, 3>& extent,
                    const std::array<int, 3>& resolution) {
  for (int d = 0; d < 3; ++d) {
    if (resolution[d] < 1)
      throw std::invalid_argument("box mesh resolution must be >= 1 per axis");
    if (!(extent[d] > 0.0))
      throw std::invalid_argument("box mesh extent must be positive");
  }
  const int nx = resolution[0], ny = resolution[1], nz = resolution[2];
  Mesh mesh;
  mesh.vertices.reserve((nx + 1) * (ny + 1) * (nz + 1));
  auto vid = [&](int i, int j, int k) {
    return i + (nx + 1) * (j + (ny + 1) * k);
  };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.vertices.push_back({extent[0] * i / nx, extent[1] * j / ny,
                                 extent[2] * k / nz});

  mesh.cells.reserve(nx * ny * nz);
  auto cid = [&](int i, int j, int k) { return i + nx * (j + ny * k); };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.cells.push_back({vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k),
                              vid(i, j + 1, k), vid(i, j, k + 1), vid(i + 1, j, k + 1),
                              vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)});

  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      mesh.boundary_faces.push_back({cid(0, j, k), 0, kXmin});
      mesh.boundary_faces.push_back({cid(nx - 1, j, k), 1, kXmax});
    }
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      mesh.boundary_faces.push_back({cid(i, 0, k), 2, kYmin});
      mesh.boundary_faces.push_back({cid(i, ny - 1, k), 3, kYmax});
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.boundary_faces.push_back({cid(i, j, 0), 4, kZmin});
      mesh.boundary_faces.push_back({cid(i, j, nz - 1), 5, kZmax});
    }
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open mesh file for writing: " + path);
  out.precision(17);
  out << mesh.n_vertices() << " " << mesh.n_cells() << " "
      << mesh.boundary_faces.size() << "\n";
  for (const auto& v : mesh.vertices)
    out << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& c : mesh.cells) {
    for (int a = 0; a < 8; ++a) out << c[a] << (a == 7 ? '\n' : ' ');
  }
  for (const auto& f : mesh.boundary_faces)
    out << f.cell << " " << f.local_face << " " << f.tag << "\n";
  if (!out) throw IoError("failed while writing mesh file: " + path);
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  int nv = 0, nc = 0, nf = 0;
  if (!(in >> nv >> nc >> nf) || nv <= 0 || nc <= 0 || nf < 0)
    throw IoError("malformed mesh header in " + path);
  Mesh mesh;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices)
    if (!(in >> v[0] >> v[1] >> v[2])) throw IoError("truncated vertex block in " + path);
  mesh.cells.resize(nc);
  for (auto& c : mesh.cells)
    for (int a = 0; a < 8; ++a) {
      if (!(in >> c[a]) || c[a] < 0 || c[a] >= nv)
        throw IoError("invalid cell connectivity in " + path);
    }
  mesh.boundary_faces.resize(nf);
  for (auto& f : mesh.boundary_faces) {
    if (!(in >> f.cell >> f.local_face >> f.tag) || f.cell < 0 || f.cell >= nc ||
        f.local_face < 0 || f.local_face > 5)
      throw IoError("invalid boundary face in " + path);
  }
  return mesh;
}

} // namespace nh
